//! Exhaustive verifiers for Φ-monotone, Φ-Hölder, Φ-convex and Φ-affine
//! grid functions, slope certificates, the n-point Jensen inequality and
//! composition with an outer function.
//!
//! All scans are exhaustive over node pairs or node triples. For a triple
//! `x_i < u_k < y_j` the induced chord weight is `t = (y - u) / (y - x)`, so
//! every error-function argument is a whole number of grid steps and is read
//! straight from the samples.

mod certificate;
mod compose;

use rayon::prelude::*;
use serde::Serialize;

use crate::errorfn::ErrorFunction;
use crate::gridfn::{GridFunction, GridSpec};
use crate::scan::Worst;
use crate::{Error, Result, Tol};

pub use certificate::{
    build_absolute_slope_certificate, build_slope_certificate, check_absolute_slope_star_holder,
    check_slope_star_monotone, verify_absolute_slope_certificate, verify_slope_certificate,
    SlopeCertificate, SlopeKind,
};
pub use compose::{compose_check, OuterFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Holds,
    Fails,
}

/// Grid location of the worst margin. Indices are 0-based node indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Witness {
    Node { k: usize, u: f64 },
    Pair { i: usize, j: usize, x: f64, y: f64 },
    Triple { i: usize, k: usize, j: usize, x: f64, u: f64, y: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub verdict: Verdict,
    /// Largest violation over the scan; negative when every inequality is strict,
    /// `-inf` when there was nothing to scan.
    pub worst_margin: f64,
    pub witness: Option<Witness>,
    pub checked_count: usize,
    pub tol: f64,
}

impl ConvexityReport {
    pub fn holds(&self) -> bool {
        self.verdict == Verdict::Holds
    }

    pub(crate) fn from_worst<K: Ord + Copy>(
        worst: Worst<K>,
        tol: f64,
        witness: impl Fn(K) -> Witness,
    ) -> Self {
        let holds = worst.key.is_none() || worst.margin <= tol;
        ConvexityReport {
            verdict: if holds { Verdict::Holds } else { Verdict::Fails },
            worst_margin: worst.margin,
            witness: worst.key.map(witness),
            checked_count: worst.count,
            tol,
        }
    }
}

/// A grid function paired with `Φ(d h)` for every realizable difference `d h`.
pub(crate) struct Aligned<'a> {
    pub grid: GridSpec,
    pub f: &'a [f64],
    pub phi: Vec<f64>,
}

impl<'a> Aligned<'a> {
    pub fn new(f: &'a GridFunction, phi: &ErrorFunction) -> Result<Self> {
        Ok(Aligned {
            grid: *f.grid(),
            f: f.values(),
            phi: phi.on_grid(f.grid())?,
        })
    }

    pub fn n(&self) -> usize {
        self.f.len()
    }

    pub fn h(&self) -> f64 {
        self.grid.step()
    }

    pub fn scale(&self) -> f64 {
        let fmax = self.f.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
        let pmax = self.phi.iter().fold(0.0, |m: f64, &v| m.max(v));
        fmax + pmax
    }

    pub fn pair_witness(&self, (i, j): (usize, usize)) -> Witness {
        Witness::Pair {
            i,
            j,
            x: self.grid.node(i),
            y: self.grid.node(j),
        }
    }

    pub fn triple_witness(&self, (i, k, j): (usize, usize, usize)) -> Witness {
        Witness::Triple {
            i,
            k,
            j,
            x: self.grid.node(i),
            u: self.grid.node(k),
            y: self.grid.node(j),
        }
    }

    /// Slopes and error quotients of the triple `i < k < j`:
    /// `(A, B, P)` with `A`, `B` the two difference quotients and
    /// `P = Φ(u-x)/(u-x) + Φ(y-u)/(y-u)`.
    #[inline]
    pub fn three_point(&self, i: usize, k: usize, j: usize) -> (f64, f64, f64) {
        let h = self.h();
        let dl = (k - i) as f64 * h;
        let dr = (j - k) as f64 * h;
        let a = (self.f[k] - self.f[i]) / dl;
        let b = (self.f[j] - self.f[k]) / dr;
        let p = self.phi[k - i] / dl + self.phi[j - k] / dr;
        (a, b, p)
    }

    /// `t (f(x) + Φ((1-t)(y-x))) + (1-t) (f(y) + Φ(t(y-x)))` for `x_i <= u_k <= y_j`,
    /// with `t = (y-u)/(y-x)`; for `i = j` this is `f(u) + Φ(0)`.
    #[inline]
    pub fn chord(&self, i: usize, k: usize, j: usize) -> f64 {
        chord_value(self.f, &self.phi, i, k, j)
    }
}

#[inline]
pub(crate) fn chord_value(f: &[f64], phi: &[f64], i: usize, k: usize, j: usize) -> f64 {
    if i == j {
        return f[k] + phi[0];
    }
    let span = (j - i) as f64;
    let t = (j - k) as f64 / span;
    let s = (k - i) as f64 / span;
    t * (f[i] + phi[k - i]) + s * (f[j] + phi[j - k])
}

/// Max-reduction over `i < j`, parallel over `i`.
pub(crate) fn scan_pairs(n: usize, margin: impl Fn(usize, usize) -> f64 + Sync) -> Worst<(usize, usize)> {
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut w = Worst::empty();
            for j in i + 1..n {
                w.push(margin(i, j), (i, j));
            }
            w
        })
        .reduce(Worst::empty, Worst::merge)
}

/// Max-reduction over `i < k < j` with `j - i <= max_span`, parallel over the
/// middle index.
pub(crate) fn scan_triples(
    n: usize,
    max_span: usize,
    margin: impl Fn(usize, usize, usize) -> f64 + Sync,
) -> Worst<(usize, usize, usize)> {
    (1..n.saturating_sub(1))
        .into_par_iter()
        .map(|k| {
            let mut w = Worst::empty();
            for i in k.saturating_sub(max_span)..k {
                let j_end = (i + max_span + 1).min(n);
                for j in k + 1..j_end {
                    w.push(margin(i, k, j), (i, k, j));
                }
            }
            w
        })
        .reduce(Worst::empty, Worst::merge)
}

/// `f(x) <= f(y) + Φ(y - x)` for all nodes `x < y`.
pub fn check_phi_monotone(f: &GridFunction, phi: &ErrorFunction, tol: Tol) -> Result<ConvexityReport> {
    let al = Aligned::new(f, phi)?;
    let tol = tol.resolve(al.scale());
    let worst = scan_pairs(al.n(), |i, j| al.f[i] - (al.f[j] + al.phi[j - i]));
    Ok(ConvexityReport::from_worst(worst, tol, |k| al.pair_witness(k)))
}

/// `|f(x) - f(y)| <= Φ(|x - y|)` for all node pairs.
pub fn check_phi_holder(f: &GridFunction, phi: &ErrorFunction, tol: Tol) -> Result<ConvexityReport> {
    let al = Aligned::new(f, phi)?;
    let tol = tol.resolve(al.scale());
    let worst = scan_pairs(al.n(), |i, j| (al.f[i] - al.f[j]).abs() - al.phi[j - i]);
    Ok(ConvexityReport::from_worst(worst, tol, |k| al.pair_witness(k)))
}

/// Three-point form of Φ-convexity: for all `x < u < y`,
/// `(f(u) - f(x) - Φ(u-x))/(u-x) <= (f(y) - f(u) + Φ(y-u))/(y-u)`.
///
/// The margin is in slope units.
pub fn check_phi_convex(f: &GridFunction, phi: &ErrorFunction, tol: Tol) -> Result<ConvexityReport> {
    let al = Aligned::new(f, phi)?;
    Ok(convex_three_point(&al, al.n(), tol))
}

pub(crate) fn convex_three_point(al: &Aligned<'_>, max_span: usize, tol: Tol) -> ConvexityReport {
    let tol = tol.resolve(al.scale());
    let worst = scan_triples(al.n(), max_span, |i, k, j| {
        let (a, b, p) = al.three_point(i, k, j);
        (a - b) - p
    });
    ConvexityReport::from_worst(worst, tol, |k| al.triple_witness(k))
}

/// The defining chord inequality scanned over node triples `x <= u <= y`
/// with the node-induced `t`. The margin is in value units.
///
/// Independent of [`check_phi_convex`]: for a proper triple the two margins
/// differ by the positive factor `(u-x)(y-u)/(y-x)`.
pub fn check_phi_convex_definitional(
    f: &GridFunction,
    phi: &ErrorFunction,
    tol: Tol,
) -> Result<ConvexityReport> {
    let al = Aligned::new(f, phi)?;
    let tol = tol.resolve(al.scale());
    let n = al.n();
    let worst = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut w = Worst::empty();
            for i in 0..=k {
                for j in k..n {
                    w.push(al.f[k] - al.chord(i, k, j), (i, k, j));
                }
            }
            w
        })
        .reduce(Worst::empty, Worst::merge);
    Ok(ConvexityReport::from_worst(worst, tol, |k| al.triple_witness(k)))
}

/// Three-point form of Φ-affinity: for all `x < u < y`,
/// `|A - B| <= Φ(u-x)/(u-x) + Φ(y-u)/(y-u)` where `A`, `B` are the left and
/// right difference quotients at `u`.
///
/// Computed from the same `(A, B, P)` as [`check_phi_convex`], so the margin
/// is exactly the larger of the convexity margins of `f` and `-f`.
pub fn check_phi_affine(f: &GridFunction, phi: &ErrorFunction, tol: Tol) -> Result<ConvexityReport> {
    let al = Aligned::new(f, phi)?;
    let tol = tol.resolve(al.scale());
    let worst = scan_triples(al.n(), al.n(), |i, k, j| {
        let (a, b, p) = al.three_point(i, k, j);
        (a - b).abs() - p
    });
    Ok(ConvexityReport::from_worst(worst, tol, |k| al.triple_witness(k)))
}

/// Margin of `f(sum t_i x_i) <= sum t_i (f(x_i) + Φ(|sum t_l x_l - x_i|))`.
///
/// The points and the barycenter must be grid nodes.
pub fn check_jensen(
    f: &GridFunction,
    phi: &ErrorFunction,
    points: &[f64],
    weights: &[f64],
) -> Result<f64> {
    if points.is_empty() || points.len() != weights.len() {
        return Err(Error::InvalidInput(
            "need equally many points and weights, at least one".into(),
        ));
    }
    if weights.iter().any(|&w| !(w >= 0.0)) {
        return Err(Error::InvalidInput("weights must be nonnegative".into()));
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidInput(format!("weights sum to {total}, not 1")));
    }
    let grid = f.grid();
    let idx: Vec<usize> = points
        .iter()
        .map(|&x| grid.node_index(x).ok_or(Error::OffGrid { value: x }))
        .collect::<Result<_>>()?;
    let bary: f64 = points.iter().zip(weights).map(|(x, w)| x * w).sum();
    let c = grid.node_index(bary).ok_or(Error::OffGrid { value: bary })?;
    let phi = phi.on_grid(grid)?;
    let v = f.values();
    let rhs: f64 = idx
        .iter()
        .zip(weights)
        .map(|(&i, &w)| w * (v[i] + phi[i.abs_diff(c)]))
        .sum();
    Ok(v[c] - rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::errorfn::make_power_error;
    use crate::gridfn::{sample_catalog, CatalogEntry};

    fn unit(n: usize) -> GridSpec {
        GridSpec::new(0.0, 1.0, n).unwrap()
    }

    fn sym(n: usize) -> GridSpec {
        GridSpec::new(-1.0, 1.0, n).unwrap()
    }

    fn power(p: f64, grid: &GridSpec) -> ErrorFunction {
        make_power_error(p, grid.length(), grid.n() + 1).unwrap()
    }

    fn zero(grid: &GridSpec) -> ErrorFunction {
        ErrorFunction::zero(grid.length(), grid.n() + 1).unwrap()
    }

    fn func(grid: GridSpec, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction::from_fn(grid, f).unwrap()
    }

    #[test]
    fn monotone_cases() {
        let g = unit(15);
        let inc = func(g, |x| x * x * x);
        assert!(check_phi_monotone(&inc, &zero(&g), Tol::Auto).unwrap().holds());
        let dec = func(g, |x| -x);
        let rep = check_phi_monotone(&dec, &power(1.0, &g), Tol::Auto).unwrap();
        assert!(rep.holds());
        assert!(rep.worst_margin.abs() < 1e-15);
        let steep = func(g, |x| -2.0 * x);
        let rep = check_phi_monotone(&steep, &power(1.0, &g), Tol::Auto).unwrap();
        assert!(!rep.holds());
        // Margin at (x, y) is y - x, largest at the outermost pair: (n-1) h.
        let expected = 14.0 / 16.0;
        assert!((rep.worst_margin - expected).abs() < 1e-14);
        assert_eq!(rep.witness.unwrap(), Witness::Pair { i: 0, j: 14, x: 1.0 / 16.0, y: 15.0 / 16.0 });
    }

    #[test]
    fn holder_cases() {
        let g = unit(15);
        let c = GridFunction::constant(g, 3.0).unwrap();
        assert!(check_phi_holder(&c, &power(2.0, &g), Tol::Auto).unwrap().holds());
        let id = func(g, |x| x);
        let rep = check_phi_holder(&id, &power(1.0, &g), Tol::Auto).unwrap();
        assert!(rep.holds() && rep.worst_margin.abs() < 1e-15);
        let two = func(g, |x| 2.0 * x);
        assert!(!check_phi_holder(&two, &power(1.0, &g), Tol::Auto).unwrap().holds());
    }

    #[test]
    fn convex_cases() {
        let g = sym(31);
        let sq = func(g, |x| x * x);
        assert!(check_phi_convex(&sq, &zero(&g), Tol::Auto).unwrap().holds());
        let gu = unit(31);
        let concave = func(gu, |x| -x * x);
        let rep = check_phi_convex(&concave, &zero(&gu), Tol::Auto).unwrap();
        assert!(!rep.holds());
        match rep.witness.unwrap() {
            Witness::Triple { i, k, j, .. } => assert!(i < k && k < j),
            w => panic!("unexpected witness {w:?}"),
        }
        let cone = func(g, |x| -x.abs());
        assert!(check_phi_convex(&cone, &power(1.0, &g), Tol::Auto).unwrap().holds());
    }

    #[test]
    fn misaligned_error_is_rejected() {
        let g = unit(15);
        let f = func(g, |x| x);
        let phi = make_power_error(1.0, 1.0, 24).unwrap();
        assert!(matches!(
            check_phi_convex(&f, &phi, Tol::Auto),
            Err(Error::Misaligned(_))
        ));
    }

    #[test]
    fn definitional_cases() {
        let g = unit(15);
        let f = func(g, |x| (5.0 * x).sin());
        let rep = check_phi_convex_definitional(&f, &zero(&g), Tol::Auto).unwrap();
        // Degenerate x = u = y triples always give exactly -Φ(0) = 0.
        assert!(rep.worst_margin >= 0.0);
        let convex = func(g, |x| x * x + 4.0);
        assert!(check_phi_convex_definitional(&convex, &zero(&g), Tol::Auto)
            .unwrap()
            .holds());
    }

    #[test]
    fn definitional_matches_three_point_sign() {
        let g = unit(12);
        for e in ["noisy:0.01:40", "concave", "sine:0.3:9", "abs:0.4", "pwl:0:1:0.5:0:1:1"] {
            let f = sample_catalog(&e.parse::<CatalogEntry>().unwrap(), &g).unwrap();
            for p in [0.0, 1.0, 2.0] {
                let phi = power(p, &g).scale(0.05).unwrap();
                let a = check_phi_convex(&f, &phi, Tol::Auto).unwrap();
                let b = check_phi_convex_definitional(&f, &phi, Tol::Auto).unwrap();
                assert_eq!(a.verdict, b.verdict, "{e} p={p}");
            }
        }
    }

    #[test]
    fn affine_cases() {
        let g = unit(15);
        let aff = func(g, |x| 2.0 * x + 1.0);
        let rep = check_phi_affine(&aff, &zero(&g), Tol::Auto).unwrap();
        assert!(rep.holds());
        let sq = func(g, |x| x * x);
        assert!(!check_phi_affine(&sq, &zero(&g), Tol::Auto).unwrap().holds());
        let saw = sample_catalog(&"sawtooth:1:0.25".parse().unwrap(), &g).unwrap();
        let two_phi1 = power(1.0, &g).scale(2.0).unwrap();
        assert!(check_phi_holder(&saw, &two_phi1, Tol::Auto).unwrap().holds());
        assert!(check_phi_affine(&saw, &two_phi1, Tol::Auto).unwrap().holds());
    }

    #[test]
    fn affine_margin_is_max_of_convex_margins() {
        let g = unit(20);
        let f = func(g, |x| (7.0 * x).cos() + x * x);
        let phi = power(1.5, &g).scale(0.1).unwrap();
        let aff = check_phi_affine(&f, &phi, Tol::Auto).unwrap();
        let c1 = check_phi_convex(&f, &phi, Tol::Auto).unwrap();
        let c2 = check_phi_convex(&f.neg(), &phi, Tol::Auto).unwrap();
        assert_eq!(aff.worst_margin, c1.worst_margin.max(c2.worst_margin));
    }

    #[test]
    fn jensen_cases() {
        let g = unit(15);
        let f = func(g, |x| (3.0 * x).sin());
        let phi = power(1.0, &g);
        let (x, y) = (g.node(2), g.node(10));
        let t = 0.25;
        let jensen = check_jensen(&f, &phi, &[x, y], &[t, 1.0 - t]).unwrap();
        // Two points reduce to the chord inequality with u = t x + (1-t) y = node 8.
        let v = f.values();
        let p = phi.on_grid(&g).unwrap();
        let chord = t * (v[2] + p[6]) + (1.0 - t) * (v[10] + p[2]);
        assert!((jensen - (v[8] - chord)).abs() < 1e-14);

        assert_eq!(check_jensen(&f, &phi, &[x], &[1.0]).unwrap(), 0.0);

        let convex = func(g, |x| (x - 0.5).powi(2));
        let pts = [g.node(3), g.node(6), g.node(8), g.node(11)];
        let m = check_jensen(&convex, &zero(&g), &pts, &[0.25; 4]).unwrap();
        assert!(m <= 1e-12);

        assert!(matches!(
            check_jensen(&f, &phi, &[g.node(0), g.node(1)], &[0.5, 0.5]),
            Err(Error::OffGrid { .. })
        ));
        assert!(check_jensen(&f, &phi, &[x, y], &[0.5, 0.6]).is_err());
        assert!(check_jensen(&f, &phi, &[0.3], &[1.0]).is_err());
    }

    #[test]
    fn scan_triples_respects_span() {
        let w = scan_triples(6, 2, |_, _, _| 0.0);
        // Only consecutive triples (k-1, k, k+1).
        assert_eq!(w.count, 4);
        let all = scan_triples(6, 6, |_, _, _| 0.0);
        assert_eq!(all.count, 20);
    }
}
