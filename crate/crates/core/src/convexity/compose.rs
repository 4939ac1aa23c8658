use std::fmt;

use super::{check_phi_convex, ConvexityReport};
use crate::errorfn::ErrorFunction;
use crate::gridfn::GridFunction;
use crate::{Error, Result, Tol};

/// Closed-form outer functions for [`compose_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OuterFunction {
    /// `max(t, 0)`
    PositivePart,
    /// `a * max(t, 0)`
    Scaled(f64),
    /// `max(t, 0) + c`
    Shifted(f64),
    /// `c`
    Constant(f64),
    /// `sqrt(max(t, 0))`
    Sqrt,
}

impl OuterFunction {
    pub fn eval(&self, t: f64) -> f64 {
        let p = t.max(0.0);
        match *self {
            OuterFunction::PositivePart => p,
            OuterFunction::Scaled(a) => a * p,
            OuterFunction::Shifted(c) => p + c,
            OuterFunction::Constant(c) => c,
            OuterFunction::Sqrt => p.sqrt(),
        }
    }

    pub fn name(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for OuterFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OuterFunction::PositivePart => write!(f, "positive-part"),
            OuterFunction::Scaled(a) => write!(f, "scaled:{a}"),
            OuterFunction::Shifted(c) => write!(f, "shifted:{c}"),
            OuterFunction::Constant(c) => write!(f, "constant:{c}"),
            OuterFunction::Sqrt => write!(f, "sqrt"),
        }
    }
}

const LATTICE: usize = 65;

fn reject(g: &OuterFunction, reason: String) -> Error {
    Error::OuterRejected {
        name: g.name(),
        reason,
    }
}

/// Samples `g` on `[lo, hi]` and checks that it is nonnegative,
/// nondecreasing, midpoint convex and subadditive there.
fn validate_outer(g: &OuterFunction, lo: f64, hi: f64) -> Result<()> {
    let pts: Vec<f64> = (0..LATTICE)
        .map(|i| lo + (hi - lo) * i as f64 / (LATTICE - 1) as f64)
        .collect();
    let vals: Vec<f64> = pts.iter().map(|&t| g.eval(t)).collect();
    if let Some(i) = vals.iter().position(|v| !v.is_finite()) {
        return Err(reject(g, format!("not finite at {}", pts[i])));
    }
    let scale = vals.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    let tol = Tol::Auto.resolve(scale);
    if let Some(i) = vals.iter().position(|&v| v < -tol) {
        return Err(reject(g, format!("negative at {}: {}", pts[i], vals[i])));
    }
    if let Some(i) = vals.windows(2).position(|w| w[1] < w[0] - tol) {
        return Err(reject(
            g,
            format!("decreasing between {} and {}", pts[i], pts[i + 1]),
        ));
    }
    for i in 0..LATTICE {
        for j in i..LATTICE {
            let (s, t) = (pts[i], pts[j]);
            let mid = g.eval(0.5 * (s + t)) - 0.5 * (vals[i] + vals[j]);
            if mid > tol {
                return Err(reject(
                    g,
                    format!("not convex on the pair ({s}, {t}): midpoint excess {mid}"),
                ));
            }
            let sub = g.eval(s + t) - (vals[i] + vals[j]);
            if sub > tol {
                return Err(reject(
                    g,
                    format!("not subadditive on the pair ({s}, {t}): excess {sub}"),
                ));
            }
        }
    }
    Ok(())
}

/// Checks that `g ∘ f` is `(g ∘ Φ)`-convex for a Φ-convex `f`.
///
/// `g` is validated on a lattice covering the values of `f` and `f + Φ`: it
/// must be nonnegative, nondecreasing, convex and subadditive. `Φ` must
/// vanish at the origin. The returned report comes from the triple scan of
/// `g ∘ f` against `g ∘ Φ`.
pub fn compose_check(
    f: &GridFunction,
    phi: &ErrorFunction,
    g: &OuterFunction,
    tol: Tol,
) -> Result<ConvexityReport> {
    if !phi.zero_at_origin() {
        return Err(Error::NotZeroAtOrigin);
    }
    let pre = check_phi_convex(f, phi, tol)?;
    if !pre.holds() {
        return Err(Error::Precondition {
            what: "inner function is not Φ-convex".into(),
            report: Box::new(pre),
        });
    }
    let v = f.values();
    let fmin = v.iter().copied().fold(f64::INFINITY, f64::min);
    let fmax = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = fmin.min(0.0);
    let hi = (fmax + phi.sup_norm()).max(0.0);
    validate_outer(g, lo, if hi > lo { hi } else { lo + 1.0 })?;

    let gf = GridFunction::new(*f.grid(), v.iter().map(|&x| g.eval(x)).collect())?;
    let gphi = phi.map(|t| g.eval(t))?;
    check_phi_convex(&gf, &gphi, tol)
}
