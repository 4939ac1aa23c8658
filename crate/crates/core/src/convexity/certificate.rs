//! Slope and absolute-slope certificates.
//!
//! A Φ-slope function `φ` for `f` satisfies
//! `f(u) + (x - u) φ(u) <= f(x) + Φ(|u - x|)` for every pair of nodes; an
//! absolute one satisfies `|f(u) - f(x) - (u - x) φ(u)| <= Φ(|u - x|)`.

use rayon::prelude::*;
use serde::Serialize;

use super::{check_phi_affine, check_phi_convex, check_phi_holder, check_phi_monotone, Aligned};
use super::{ConvexityReport, Witness};
use crate::errorfn::{star_transform, ErrorFunction};
use crate::gridfn::{GridFunction, GridSpec};
use crate::scan::Worst;
use crate::{Error, Result, Tol};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SlopeKind {
    Slope,
    AbsoluteSlope,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeCertificate {
    grid: GridSpec,
    phi_values: Vec<f64>,
    kind: SlopeKind,
}

impl SlopeCertificate {
    pub fn new(grid: GridSpec, phi_values: Vec<f64>, kind: SlopeKind) -> Result<Self> {
        // Reuse the length and finiteness checks.
        let g = GridFunction::new(grid, phi_values)?;
        Ok(SlopeCertificate {
            grid,
            phi_values: g.into_values(),
            kind,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.phi_values
    }

    pub fn kind(&self) -> SlopeKind {
        self.kind
    }

    pub fn as_grid_function(&self) -> GridFunction {
        GridFunction::new(self.grid, self.phi_values.clone()).expect("validated on construction")
    }
}

fn precondition(what: &str, report: ConvexityReport) -> Error {
    Error::Precondition {
        what: what.to_string(),
        report: Box::new(report),
    }
}

/// `(f(u) - f(x) ∓ Φ(u - x)) / (u - x)` for nodes `x_i < u_k`.
#[inline]
fn quotient(al: &Aligned<'_>, lo: usize, hi: usize, sign: f64) -> f64 {
    let d = (hi - lo) as f64 * al.h();
    (al.f[hi] - al.f[lo] + sign * al.phi[hi - lo]) / d
}

fn max_over(range: impl Iterator<Item = f64>) -> f64 {
    range.fold(f64::NEG_INFINITY, f64::max)
}

fn min_over(range: impl Iterator<Item = f64>) -> f64 {
    range.fold(f64::INFINITY, f64::min)
}

/// Tolerance for value-unit certificate checks.
///
/// A three-point scan that passes with slope tolerance `slope_tol` yields a
/// certificate whose value-unit residual is at most `slope_tol` times the
/// largest distance.
fn value_tol(tol: Tol, al: &Aligned<'_>, slope_tol: f64, cert: &[f64]) -> f64 {
    match tol {
        Tol::Abs(t) => t,
        Tol::Auto => {
            let cmax = cert.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
            let len = al.grid.length();
            Tol::Auto.resolve(al.scale() + len * cmax).max(slope_tol * len)
        }
    }
}

/// Builds `φ(u) = sup_{x<u} (f(u) - f(x) - Φ(u-x)) / (u-x)` and checks it at
/// every node pair.
///
/// At the leftmost node the supremum is empty; there `φ` takes the right-hand
/// bound `inf_{y>u} (f(y) - f(u) + Φ(y-u)) / (y-u)`.
pub fn build_slope_certificate(
    f: &GridFunction,
    phi: &ErrorFunction,
    tol: Tol,
) -> Result<SlopeCertificate> {
    let report = check_phi_convex(f, phi, tol)?;
    if !report.holds() {
        return Err(precondition("function is not Φ-convex on the grid", report));
    }
    let al = Aligned::new(f, phi)?;
    let n = al.n();
    let values: Vec<f64> = (0..n)
        .map(|k| {
            if k == 0 {
                min_over((1..n).map(|j| quotient(&al, 0, j, 1.0)))
            } else {
                max_over((0..k).map(|i| quotient(&al, i, k, -1.0)))
            }
        })
        .collect();
    let cert = SlopeCertificate::new(al.grid, values, SlopeKind::Slope)?;
    let vt = value_tol(tol, &al, report.tol, cert.values());
    let check = verify_slope_certificate(f, phi, &cert, Tol::Abs(vt))?;
    if !check.holds() {
        return Err(precondition("slope certificate failed verification", check));
    }
    Ok(cert)
}

fn certificate_pairs(
    al: &Aligned<'_>,
    cert: &SlopeCertificate,
    residual: impl Fn(f64, f64) -> f64 + Sync,
) -> Worst<(usize, usize)> {
    let n = al.n();
    let h = al.h();
    let c = cert.values();
    // Key (x index, u index).
    (0..n)
        .into_par_iter()
        .map(|k| {
            let mut w = Worst::empty();
            for i in 0..n {
                // f(u) - f(x) - (u - x) φ(u)
                let r = al.f[k] - al.f[i] - (k as f64 - i as f64) * h * c[k];
                w.push(residual(r, al.phi[i.abs_diff(k)]), (i, k));
            }
            w
        })
        .reduce(Worst::empty, Worst::merge)
}

/// Scans `f(u) + (x - u) φ(u) <= f(x) + Φ(|u - x|)` over all node pairs,
/// `x = u` included. Witness `Pair { i, j }` carries `x = x_i`, `u = x_j`.
pub fn verify_slope_certificate(
    f: &GridFunction,
    phi: &ErrorFunction,
    cert: &SlopeCertificate,
    tol: Tol,
) -> Result<ConvexityReport> {
    let al = Aligned::new(f, phi)?;
    if !al.grid.is_compatible(&cert.grid) {
        return Err(Error::GridMismatch);
    }
    let tol = tol.resolve(al.scale() + al.grid.length() * abs_max(cert.values()));
    let worst = certificate_pairs(&al, cert, |r, p| r - p);
    Ok(ConvexityReport::from_worst(worst, tol, |k| al.pair_witness(k)))
}

/// Scans `|f(u) - f(x) - (u - x) φ(u)| <= Φ(|u - x|)` over all node pairs.
pub fn verify_absolute_slope_certificate(
    f: &GridFunction,
    phi: &ErrorFunction,
    cert: &SlopeCertificate,
    tol: Tol,
) -> Result<ConvexityReport> {
    let al = Aligned::new(f, phi)?;
    if !al.grid.is_compatible(&cert.grid) {
        return Err(Error::GridMismatch);
    }
    let tol = tol.resolve(al.scale() + al.grid.length() * abs_max(cert.values()));
    let worst = certificate_pairs(&al, cert, |r, p| r.abs() - p);
    Ok(ConvexityReport::from_worst(worst, tol, |k| al.pair_witness(k)))
}

fn abs_max(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m: f64, x| m.max(x.abs()))
}

/// Builds `φ(u) = max(sup_{x<u} (f(u)-f(x)-Φ(u-x))/(u-x), sup_{y>u} (f(y)-f(u)-Φ(y-u))/(y-u))`
/// for a Φ-affine `f` and a nondecreasing `Φ`.
///
/// Besides the pairwise check, the min-max bracket
/// `max(lower sups) <= min(upper infs)` is checked at every node.
pub fn build_absolute_slope_certificate(
    f: &GridFunction,
    phi: &ErrorFunction,
    tol: Tol,
) -> Result<SlopeCertificate> {
    let report = check_phi_affine(f, phi, tol)?;
    if !report.holds() {
        return Err(precondition("function is not Φ-affine on the grid", report));
    }
    let al = Aligned::new(f, phi)?;
    if let Some(d) = al.phi.windows(2).position(|w| w[1] < w[0]) {
        let stride = phi.stride_for(&al.grid)?;
        return Err(Error::NotNondecreasing { index: d * stride });
    }
    let n = al.n();
    let mut values = Vec::with_capacity(n);
    let mut bracket = Worst::empty();
    for k in 0..n {
        let lower_left = max_over((0..k).map(|i| quotient(&al, i, k, -1.0)));
        let lower_right = max_over((k + 1..n).map(|j| quotient(&al, k, j, -1.0)));
        let upper_left = min_over((0..k).map(|i| quotient(&al, i, k, 1.0)));
        let upper_right = min_over((k + 1..n).map(|j| quotient(&al, k, j, 1.0)));
        let lo = lower_left.max(lower_right);
        bracket.push(lo - upper_left.min(upper_right), k);
        values.push(lo);
    }
    let bracket = ConvexityReport::from_worst(bracket, report.tol, |k| Witness::Node {
        k,
        u: al.grid.node(k),
    });
    if !bracket.holds() {
        return Err(precondition("min-max bracket violated", bracket));
    }
    let cert = SlopeCertificate::new(al.grid, values, SlopeKind::AbsoluteSlope)?;
    let vt = value_tol(tol, &al, report.tol, cert.values());
    let check = verify_absolute_slope_certificate(f, phi, &cert, Tol::Abs(vt))?;
    if !check.holds() {
        return Err(precondition("absolute slope certificate failed verification", check));
    }
    Ok(cert)
}

/// Tolerance for checks on a certificate itself: value-unit residuals of the
/// certificate turn into slope-unit residuals divided by at least `h`.
fn certificate_tol(tol: Tol, cert: &GridFunction, star: &ErrorFunction) -> Result<f64> {
    Ok(match tol {
        Tol::Abs(t) => t,
        Tol::Auto => {
            let star_max = abs_max(&star.on_grid(cert.grid())?);
            let h = cert.grid().step();
            (1.0 + 2.0 / h) * Tol::Auto.resolve(cert.sup_norm() + star_max)
        }
    })
}

/// Checks that a slope certificate is Φ*-monotone, `Φ*(t) = 2 Φ(t) / t`.
pub fn check_slope_star_monotone(
    cert: &SlopeCertificate,
    phi: &ErrorFunction,
    tol: Tol,
) -> Result<ConvexityReport> {
    if cert.kind != SlopeKind::Slope {
        return Err(Error::InvalidInput("expected a slope certificate".into()));
    }
    let g = cert.as_grid_function();
    let star = star_transform(phi);
    let t = certificate_tol(tol, &g, &star)?;
    check_phi_monotone(&g, &star, Tol::Abs(t))
}

/// Checks that an absolute slope certificate is Φ*-Hölder, `Φ*(t) = 2 Φ(t) / t`.
///
/// Φ*-Hölder implies Φ*-monotone.
pub fn check_absolute_slope_star_holder(
    cert: &SlopeCertificate,
    phi: &ErrorFunction,
    tol: Tol,
) -> Result<ConvexityReport> {
    if cert.kind != SlopeKind::AbsoluteSlope {
        return Err(Error::InvalidInput("expected an absolute slope certificate".into()));
    }
    let g = cert.as_grid_function();
    let star = star_transform(phi);
    let t = certificate_tol(tol, &g, &star)?;
    check_phi_holder(&g, &star, Tol::Abs(t))
}
