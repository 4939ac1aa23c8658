//! Error functions and their algebra: the Γ property, the γ-transform and its
//! iteration to the Γ-envelope, the Φ* transform, and the subadditivity
//! diagnostics that bracket the Γ property.
//!
//! An error function lives on `[0, length)`. It is stored at the `m + 1`
//! nodes `t_j = j * length / m`, `j = 0..=m`; the last node is a closed cap
//! that only serves interpolation, so the pair scans below never touch it.

use rayon::prelude::*;
use serde::Serialize;

use crate::gridfn::{GridSpec, NODE_REL_TOL};
use crate::scan::Worst;
use crate::{Error, Result, Tol};

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorFunction {
    length: f64,
    samples: Vec<f64>,
}

impl ErrorFunction {
    /// `samples[j]` is the value at `j * length / m` with `m = samples.len() - 1`.
    pub fn new(length: f64, samples: Vec<f64>) -> Result<Self> {
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidErrorFunction(format!(
                "length must be positive and finite, got {length}"
            )));
        }
        if samples.len() < 2 {
            return Err(Error::InvalidErrorFunction("need at least two samples".into()));
        }
        if let Some(j) = samples.iter().position(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::InvalidErrorFunction(format!(
                "sample {j} is {} (must be finite and nonnegative)",
                samples[j]
            )));
        }
        Ok(ErrorFunction { length, samples })
    }

    pub fn zero(length: f64, m: usize) -> Result<Self> {
        Self::new(length, vec![0.0; m + 1])
    }

    /// Samples `rule(t)` at every node.
    pub fn from_fn(length: f64, m: usize, rule: impl Fn(f64) -> f64) -> Result<Self> {
        let dt = length / m as f64;
        Self::new(length, (0..=m).map(|j| rule(j as f64 * dt)).collect())
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Number of sampling intervals; there are `m + 1` samples.
    pub fn m(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn dt(&self) -> f64 {
        self.length / self.m() as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.dt()
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Membership in the class of error functions vanishing at the origin.
    pub fn zero_at_origin(&self) -> bool {
        self.samples[0] == 0.0
    }

    pub fn sup_norm(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, &v| m.max(v))
    }

    /// Linear interpolation; `None` outside `[0, length]`.
    pub fn eval(&self, t: f64) -> Option<f64> {
        if !(0.0..=self.length).contains(&t) {
            return None;
        }
        let pos = t / self.dt();
        let j = (pos.floor() as usize).min(self.m() - 1);
        let w = pos - j as f64;
        Some(self.samples[j] * (1.0 - w) + self.samples[j + 1] * w)
    }

    /// Re-samples on `m` intervals by linear interpolation.
    pub fn resample(&self, m: usize) -> Result<Self> {
        if m < 1 {
            return Err(Error::InvalidErrorFunction("m must be at least 1".into()));
        }
        let dt = self.length / m as f64;
        let samples = (0..=m)
            .map(|j| self.eval((j as f64 * dt).min(self.length)).unwrap_or(0.0))
            .collect();
        Self::new(self.length, samples)
    }

    pub fn scale(&self, alpha: f64) -> Result<Self> {
        Self::new(self.length, self.samples.iter().map(|v| alpha * v).collect())
    }

    pub fn add(&self, other: &ErrorFunction) -> Result<Self> {
        self.zip(other, |a, b| a + b)
    }

    pub fn max(&self, other: &ErrorFunction) -> Result<Self> {
        self.zip(other, f64::max)
    }

    /// Applies `g` samplewise; the result must stay nonnegative.
    pub fn map(&self, g: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.length, self.samples.iter().map(|&v| g(v)).collect())
    }

    fn zip(&self, other: &ErrorFunction, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.m() != other.m() || (self.length - other.length).abs() > NODE_REL_TOL * self.length {
            return Err(Error::Misaligned("error functions on different sample grids".into()));
        }
        let samples = self.samples.iter().zip(&other.samples).map(|(&a, &b)| op(a, b)).collect();
        Self::new(self.length, samples)
    }

    /// Number of error-grid intervals per grid step, if `grid` is aligned.
    ///
    /// Aligned means the grid step is an integer multiple of `dt` and the
    /// interval fits inside the error function's domain.
    pub fn stride_for(&self, grid: &GridSpec) -> Result<usize> {
        let h = grid.step();
        let ratio = h / self.dt();
        let stride = ratio.round();
        if stride < 1.0 || (ratio - stride).abs() > NODE_REL_TOL * ratio {
            return Err(Error::Misaligned(format!(
                "grid step {h} is not a multiple of the error step {}",
                self.dt()
            )));
        }
        if grid.length() > self.length * (1.0 + NODE_REL_TOL) {
            return Err(Error::Misaligned(format!(
                "interval length {} exceeds the error function's length {}",
                grid.length(),
                self.length
            )));
        }
        Ok(stride as usize)
    }

    /// `Φ(d h)` for `d = 0..n`, the differences an `n`-node grid can realize.
    pub fn on_grid(&self, grid: &GridSpec) -> Result<Vec<f64>> {
        let stride = self.stride_for(grid)?;
        Ok((0..grid.n()).map(|d| self.samples[d * stride]).collect())
    }
}

/// Outcome of a pairwise error-function inequality scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaReport {
    pub holds: bool,
    /// Largest `lhs - rhs` over the scanned pairs.
    pub worst_margin: f64,
    /// `(x, y)` attaining `worst_margin`; the lexicographically first pair on ties.
    pub witness: Option<(f64, f64)>,
    pub witness_index: Option<(usize, usize)>,
    pub tol: f64,
    pub checked: usize,
}

fn pair_scan(
    phi: &ErrorFunction,
    first_min: usize,
    tol: f64,
    margin: impl Fn(usize, usize) -> f64 + Sync,
) -> GammaReport {
    let m = phi.m();
    let worst = (first_min..m)
        .into_par_iter()
        .map(|i| {
            let mut w = Worst::empty();
            for j in 1..m - i {
                w.push(margin(i, j), (i, j));
            }
            w
        })
        .reduce(Worst::empty, Worst::merge);
    GammaReport {
        holds: worst.key.is_none() || worst.margin <= tol,
        worst_margin: worst.margin,
        witness: worst.key.map(|(i, j)| (phi.node(i), phi.node(j))),
        witness_index: worst.key,
        tol,
        checked: worst.count,
    }
}

/// `(2x + y) / y` for `x = i dt`, `y = j dt`.
#[inline]
fn gamma_weight(i: usize, j: usize) -> f64 {
    (2 * i + j) as f64 / j as f64
}

/// Samples `Φ_p(t) = t^p` for `t > 0`, `Φ_p(0) = 0`.
pub fn make_power_error(p: f64, length: f64, m: usize) -> Result<ErrorFunction> {
    if !p.is_finite() {
        return Err(Error::InvalidInput(format!("exponent must be finite, got {p}")));
    }
    if m < 2 {
        return Err(Error::InvalidErrorFunction(format!("need m >= 2, got {m}")));
    }
    ErrorFunction::from_fn(length, m, |t| if t > 0.0 { t.powf(p) } else { 0.0 })
}

/// Scans `Φ(x + y) <= Φ(x) + (2x + y)/y Φ(y)` over all node pairs with
/// `x >= 0`, `y > 0`, `x + y < length`.
pub fn check_gamma(phi: &ErrorFunction, tol: Tol) -> GammaReport {
    let s = phi.samples();
    let tol = tol.resolve(phi.sup_norm());
    pair_scan(phi, 0, tol, |i, j| s[i + j] - (s[i] + gamma_weight(i, j) * s[j]))
}

/// Subadditivity of `sqrt(Φ)` on positive node pairs.
pub fn check_sqrt_subadditive(phi: &ErrorFunction, tol: Tol) -> GammaReport {
    let r: Vec<f64> = phi.samples().iter().map(|v| v.sqrt()).collect();
    let tol = tol.resolve(r.iter().fold(0.0, |a, &b| a.max(b)));
    pair_scan(phi, 1, tol, |i, j| r[i + j] - (r[i] + r[j]))
}

/// Subadditivity of `t -> Φ(t) / t` on positive node pairs.
pub fn check_ratio_subadditive(phi: &ErrorFunction, tol: Tol) -> GammaReport {
    let r = ratio_samples(phi, 1);
    let tol = tol.resolve(r.iter().fold(0.0, |a, &b| a.max(b.abs())));
    pair_scan(phi, 1, tol, |i, j| r[i + j] - (r[i] + r[j]))
}

/// `Φ(t_j) / t_j^power` for `j >= 1`, with 0 at `j = 0`.
fn ratio_samples(phi: &ErrorFunction, power: i32) -> Vec<f64> {
    phi.samples()
        .iter()
        .enumerate()
        .map(|(j, &v)| if j == 0 { 0.0 } else { v / phi.node(j).powi(power) })
        .collect()
}

/// Outcome of a consecutive-node monotonicity scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneReport {
    pub holds: bool,
    /// Largest increase `r(t_{j+1}) - r(t_j)`.
    pub worst_increase: f64,
    pub witness_index: Option<usize>,
    pub witness: Option<f64>,
    pub tol: f64,
}

/// Whether `t -> t^-2 Φ(t)` is nonincreasing over consecutive positive nodes.
pub fn check_t2_decreasing(phi: &ErrorFunction, tol: Tol) -> MonotoneReport {
    let r = ratio_samples(phi, 2);
    let m = phi.m();
    let tol = tol.resolve(r[1..m].iter().fold(0.0, |a, &b| a.max(b.abs())));
    let mut worst = Worst::empty();
    for j in 1..m.saturating_sub(1) {
        worst.push(r[j + 1] - r[j], j);
    }
    MonotoneReport {
        holds: worst.key.is_none() || worst.margin <= tol,
        worst_increase: worst.margin,
        witness_index: worst.key,
        witness: worst.key.map(|j| phi.node(j)),
        tol,
    }
}

/// Ratios `t^-2 Φ(t)` on the first decade of positive nodes, and their trend.
///
/// Whether `t^-2 Φ(t) -> 0` as `t -> 0` cannot be decided from samples; this
/// only reports what the finest nodes show.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SmallScaleTrend {
    pub t: Vec<f64>,
    pub ratio: Vec<f64>,
    pub trend: &'static str,
}

pub fn small_scale_trend(phi: &ErrorFunction) -> SmallScaleTrend {
    let r = ratio_samples(phi, 2);
    let last = 10.min(phi.m() - 1).max(1);
    let ratio: Vec<f64> = r[1..=last].to_vec();
    let t = (1..=last).map(|j| phi.node(j)).collect();
    let up = ratio.windows(2).any(|w| w[1] > w[0]);
    let down = ratio.windows(2).any(|w| w[1] < w[0]);
    let trend = match (up, down) {
        (false, false) => "flat",
        (true, false) => "increasing",
        (false, true) => "decreasing",
        (true, true) => "mixed",
    };
    SmallScaleTrend { t, ratio, trend }
}

/// Margin of `Φ(u_1 + ... + u_n) <= Φ(u_1) + sum_{k>=2} (2(u_1+...+u_{k-1}) + u_k)/u_k Φ(u_k)`.
///
/// Every `u_k` must be a sample node: `u_1 >= 0`, the others positive, and the
/// total strictly inside the domain.
pub fn check_chain_inequality(phi: &ErrorFunction, u: &[f64]) -> Result<f64> {
    if u.is_empty() {
        return Err(Error::InvalidInput("empty chain".into()));
    }
    let dt = phi.dt();
    let idx: Vec<usize> = u
        .iter()
        .map(|&v| {
            let pos = v / dt;
            let k = pos.round();
            if !v.is_finite() || k < 0.0 || (pos - k).abs() > NODE_REL_TOL * (1.0 + k) {
                Err(Error::OffGrid { value: v })
            } else {
                Ok(k as usize)
            }
        })
        .collect::<Result<_>>()?;
    if idx[1..].contains(&0) {
        return Err(Error::InvalidInput("u_2..u_n must be positive".into()));
    }
    let total: usize = idx.iter().sum();
    if total >= phi.m() {
        return Err(Error::InvalidInput(format!(
            "sum {} must stay below the length {}",
            u.iter().sum::<f64>(),
            phi.length()
        )));
    }
    let s = phi.samples();
    let mut rhs = s[idx[0]];
    let mut partial = idx[0];
    for &k in &idx[1..] {
        rhs += gamma_weight(partial, k) * s[k];
        partial += k;
    }
    Ok(s[total] - rhs)
}

/// `Φ^γ(u) = inf { Φ(x) + (2x + y)/y Φ(y) : x >= 0, y > 0, x + y = u }` over
/// node splits, with `Φ^γ(0) = 0`.
pub fn gamma_transform(phi: &ErrorFunction) -> Result<ErrorFunction> {
    if !phi.zero_at_origin() {
        return Err(Error::NotZeroAtOrigin);
    }
    let s = phi.samples();
    let m = phi.m();
    let mut out: Vec<f64> = (0..=m)
        .into_par_iter()
        .map(|k| {
            (0..k)
                .map(|i| s[i] + gamma_weight(i, k - i) * s[k - i])
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    out[0] = 0.0;
    ErrorFunction::new(phi.length(), out)
}

/// The sequence `Φ_1 = Φ`, `Φ_{k+1} = Φ_k^γ` and its convergence record.
#[derive(Debug, Clone)]
pub struct EnvelopeTrace {
    pub iterates: Vec<ErrorFunction>,
    pub converged: bool,
    /// `||Φ_{k+1} - Φ_k||_inf` for each step taken.
    pub sup_deltas: Vec<f64>,
}

impl EnvelopeTrace {
    pub fn last(&self) -> &ErrorFunction {
        self.iterates.last().expect("trace always holds the initial function")
    }
}

/// Iterates the γ-transform until the sup-norm step is at most `tol` or
/// `max_iter` transforms have been applied.
pub fn gamma_envelope(phi: &ErrorFunction, tol: f64, max_iter: usize) -> Result<EnvelopeTrace> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("tol must be positive, got {tol}")));
    }
    if max_iter < 1 {
        return Err(Error::InvalidInput("max_iter must be at least 1".into()));
    }
    let mut iterates = vec![phi.clone()];
    let mut sup_deltas = Vec::new();
    let mut converged = false;
    for _ in 0..max_iter {
        let cur = iterates.last().unwrap();
        let next = gamma_transform(cur)?;
        let delta = cur
            .samples()
            .iter()
            .zip(next.samples())
            .fold(0.0, |d, (a, b)| f64::max(d, (a - b).abs()));
        iterates.push(next);
        sup_deltas.push(delta);
        if delta <= tol {
            converged = true;
            break;
        }
    }
    Ok(EnvelopeTrace {
        iterates,
        converged,
        sup_deltas,
    })
}

/// `Φ*(t) = 2 Φ(t) / t` for `t > 0`, `Φ*(0) = 0`.
pub fn star_transform(phi: &ErrorFunction) -> ErrorFunction {
    let samples = ratio_samples(phi, 1).into_iter().map(|v| 2.0 * v).collect();
    ErrorFunction::new(phi.length(), samples).expect("ratios of nonnegative samples are nonnegative")
}
