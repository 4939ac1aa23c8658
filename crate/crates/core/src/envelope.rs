//! The lower Φ-convex envelope and the sandwich decision procedure.
//!
//! ```text
//! C(f)(u) = inf { t (f(x) + Φ((1-t)(y-x))) + (1-t) (f(y) + Φ(t(y-x))) }
//! ```
//!
//! over `x <= u <= y` with `u = t x + (1-t) y`. On a grid the infimum runs
//! over node pairs with the node-induced `t`, which is exactly the set of
//! triples [`check_phi_convex_definitional`] scans. Hence `C(f) = f` at every
//! node iff that check has margin `<= 0`, and `||C(f) - f||` equals the
//! positive part of its worst margin.

use rayon::prelude::*;
use serde::Serialize;

use crate::convexity::{
    check_phi_convex, check_phi_convex_definitional, chord_value, convex_three_point, Aligned,
    ConvexityReport, Witness,
};
use crate::errorfn::ErrorFunction;
use crate::gridfn::{ensure_same_grid, GridFunction, GridSpec};
use crate::scan::Worst;
use crate::{Error, Result, Tol};

/// One application of the envelope operator.
///
/// Never exceeds `f`: the degenerate triple `x = u = y` contributes `f(u)`.
pub fn envelope_step(f: &GridFunction, phi: &ErrorFunction) -> Result<GridFunction> {
    if !phi.zero_at_origin() {
        return Err(Error::NotZeroAtOrigin);
    }
    let p = phi.on_grid(f.grid())?;
    Ok(step_values(f, &p))
}

fn step_values(f: &GridFunction, p: &[f64]) -> GridFunction {
    let v = f.values();
    let n = v.len();
    let out: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut best = v[k];
            for i in 0..=k {
                for j in k..n {
                    best = best.min(chord_value(v, p, i, k, j));
                }
            }
            best
        })
        .collect();
    GridFunction::new(*f.grid(), out).expect("chord values of finite data are finite")
}

/// Stopping rule for [`envelope_fixed_point`]. `None` picks the defaults
/// `tol = 1e-10 (1 + ||f||)` and `max_iter = 10 n`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct EnvelopeOptions {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
}

impl EnvelopeOptions {
    fn resolve(&self, f: &GridFunction) -> Result<(f64, usize)> {
        let tol = self.tol.unwrap_or(1e-10 * (1.0 + f.sup_norm()));
        let max_iter = self.max_iter.unwrap_or(10 * f.len());
        if !(tol > 0.0) || !tol.is_finite() {
            return Err(Error::InvalidInput(format!("tol must be positive, got {tol}")));
        }
        if max_iter == 0 {
            return Err(Error::InvalidInput("max_iter must be at least 1".into()));
        }
        Ok((tol, max_iter))
    }
}

#[derive(Debug, Clone)]
pub struct EnvelopeResult {
    pub input: GridFunction,
    /// `||f_{k+1} - f_k||` for each step taken.
    pub iterates_sup_delta: Vec<f64>,
    pub result: GridFunction,
    pub iterations: usize,
    pub converged: bool,
    /// Definitional check of `result` with tolerance `2 tol`.
    pub is_phi_convex: bool,
    pub tol: f64,
}

/// Iterates `f_1 = f`, `f_{k+1} = C(f_k)` until a step moves no node by more
/// than `tol`. The iterates decrease pointwise.
pub fn envelope_fixed_point(
    f: &GridFunction,
    phi: &ErrorFunction,
    opts: &EnvelopeOptions,
) -> Result<EnvelopeResult> {
    if !phi.zero_at_origin() {
        return Err(Error::NotZeroAtOrigin);
    }
    let (tol, max_iter) = opts.resolve(f)?;
    let p = phi.on_grid(f.grid())?;
    let mut cur = f.clone();
    let mut deltas = Vec::new();
    let mut converged = false;
    for _ in 0..max_iter {
        let next = step_values(&cur, &p);
        let delta = next.sup_distance(&cur)?;
        deltas.push(delta);
        cur = next;
        if delta <= tol {
            converged = true;
            break;
        }
    }
    let is_phi_convex = check_phi_convex_definitional(&cur, phi, Tol::Abs(2.0 * tol))?.holds();
    Ok(EnvelopeResult {
        input: f.clone(),
        iterations: deltas.len(),
        iterates_sup_delta: deltas,
        result: cur,
        converged,
        is_phi_convex,
        tol,
    })
}

/// I-grid with `n` interior nodes spanning `phi`'s whole domain.
fn base_grid(phi: &ErrorFunction, n: usize) -> Result<GridSpec> {
    GridSpec::new(0.0, phi.length(), n)
}

/// `Ψ(u) = -Φ(|u|)` on the difference interval `J = I - I`.
///
/// `I` has length `ℓ = phi.length()` and `n` interior nodes, so its step is
/// `h = ℓ / (n + 1)`. The result lives on the `2n - 1` interior nodes
/// `k h`, `|k| <= n - 1`, which are the differences of `I`-nodes.
pub fn psi_from_phi(phi: &ErrorFunction, n: usize) -> Result<GridFunction> {
    let base = base_grid(phi, n)?;
    let p = phi.on_grid(&base)?;
    let h = base.step();
    let j = GridSpec::new(-(n as f64) * h, n as f64 * h, 2 * n - 1)?;
    let values = (0..2 * n - 1)
        .map(|k| -p[(k as isize - (n as isize - 1)).unsigned_abs()])
        .collect();
    GridFunction::new(j, values)
}

/// Φ-convexity of [`psi_from_phi`] on `J`.
///
/// Only triples `x < u < y` with `y - x` below `ℓ` are scanned, so every
/// error value needed lies in `Φ`'s domain. These are the triples that arise
/// as differences `u - v` with `u` fixed and `v` ranging over `I`.
pub fn check_psi_convex(phi: &ErrorFunction, n: usize) -> Result<ConvexityReport> {
    let psi = psi_from_phi(phi, n)?;
    let base = base_grid(phi, n)?;
    let al = Aligned {
        grid: *psi.grid(),
        f: psi.values(),
        phi: phi.on_grid(&base)?,
    };
    Ok(convex_three_point(&al, n - 1, Tol::Auto))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SandwichStatus {
    /// A Φ-convex `h` with `g <= h <= f` was produced.
    Holds,
    /// The cross inequality fails at the witness.
    Violated,
    /// The cross inequality holds but the envelope of `f` does not separate;
    /// see `psi_convex`.
    HypothesisNotMet,
}

#[derive(Debug, Clone)]
pub struct SandwichReport {
    pub status: SandwichStatus,
    pub inequality_holds: bool,
    /// Largest `g(u) - chord_f(x, u, y)` over `x <= u <= y`, in value units.
    pub worst_margin: f64,
    pub witness: Option<Witness>,
    pub h: Option<GridFunction>,
    /// Ψ-convexity on the difference grid; computed only once the cross
    /// inequality holds.
    pub psi_convex: Option<bool>,
    pub envelope: Option<EnvelopeResult>,
    pub tol: f64,
}

/// Decides whether some Φ-convex `h` satisfies `g <= h <= f`.
///
/// First scans the cross inequality
/// `g(u) <= t (f(x) + Φ((1-t)(y-x))) + (1-t) (f(y) + Φ(t(y-x)))` over every
/// node triple `x <= u <= y`. If it holds, `h` is the envelope fixed point of
/// `f`, accepted only after `g <= h <= f` and the Φ-convexity of `h` are
/// re-checked.
pub fn sandwich(g: &GridFunction, f: &GridFunction, phi: &ErrorFunction) -> Result<SandwichReport> {
    ensure_same_grid(g.grid(), f.grid())?;
    if !phi.zero_at_origin() {
        return Err(Error::NotZeroAtOrigin);
    }
    let al = Aligned::new(f, phi)?;
    let gv = g.values();
    let n = al.n();
    let tol = Tol::Auto.resolve(al.scale() + g.sup_norm());
    let worst = (0..n)
        .into_par_iter()
        .map(|k| {
            let mut w = Worst::empty();
            for i in 0..=k {
                for j in k..n {
                    w.push(gv[k] - al.chord(i, k, j), (i, k, j));
                }
            }
            w
        })
        .reduce(Worst::empty, Worst::merge);
    let worst_margin = worst.margin;
    let witness = worst.key.map(|k| al.triple_witness(k));
    if worst_margin > tol {
        return Ok(SandwichReport {
            status: SandwichStatus::Violated,
            inequality_holds: false,
            worst_margin,
            witness,
            h: None,
            psi_convex: None,
            envelope: None,
            tol,
        });
    }

    let env = envelope_fixed_point(f, phi, &EnvelopeOptions::default())?;
    let h = &env.result;
    let env_tol = env.tol.max(tol);
    let below_f = h.max_excess(f)? <= env_tol;
    let above_g = g.max_excess(h)? <= env_tol;
    // Value-unit slack 2 tol becomes at most 4 tol / step in slope units.
    let slope_tol = Tol::Auto
        .resolve(h.sup_norm() + phi.sup_norm())
        .max(4.0 * env_tol / al.h());
    let convex = check_phi_convex(h, phi, Tol::Abs(slope_tol))?.holds();
    let psi_convex = check_psi_convex(phi, n)?.holds();
    let ok = below_f && above_g && convex;
    Ok(SandwichReport {
        status: if ok {
            SandwichStatus::Holds
        } else {
            SandwichStatus::HypothesisNotMet
        },
        inequality_holds: true,
        worst_margin,
        witness,
        h: ok.then(|| h.clone()),
        psi_convex: Some(psi_convex),
        envelope: Some(env),
        tol,
    })
}
