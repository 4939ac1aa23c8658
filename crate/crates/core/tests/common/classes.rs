//! Class-closure properties as plain checks, shared by the property suite and
//! the acceptance runner. Each returns `Err` with a description on failure.

use super::*;
use phi_convex::{
    check_gamma, check_phi_affine, check_phi_convex, check_phi_holder, family_inf, family_sup,
    limsup_sequence, linear_combination, ErrorFunction, LimsupWindow, Tol,
};

pub const N: usize = 32;

pub type Check = Result<(), String>;

fn ensure(cond: bool, what: impl FnOnce() -> String) -> Check {
    if cond {
        Ok(())
    } else {
        Err(what())
    }
}

fn convex(f: &GridFunction, phi: &ErrorFunction) -> bool {
    check_phi_convex(f, phi, Tol::Auto).unwrap().holds()
}

fn affine(f: &GridFunction, phi: &ErrorFunction) -> bool {
    check_phi_affine(f, phi, Tol::Auto).unwrap().holds()
}

/// Nonnegative combinations: `sum a_i f_i` against `sum a_i Φ_i`.
pub fn combinations(family: &[(Member, f64)]) -> Check {
    let grid = unit_grid(N);
    let mut phi = zero_on(&grid);
    let mut fns = Vec::new();
    let mut coeffs = Vec::new();
    for (m, alpha) in family {
        let f = m.sample(grid);
        let e = m.error(&grid);
        ensure(convex(&f, &e), || format!("generated member not in its class: {m:?}"))?;
        phi = phi.add(&e.scale(*alpha).unwrap()).unwrap();
        fns.push(f);
        coeffs.push(*alpha);
    }
    let combo = linear_combination(&coeffs, &fns).unwrap();
    ensure(convex(&combo, &phi), || format!("combination failed, coeffs {coeffs:?}"))
}

/// Members sharing one `c Φ_p` large enough for all of them.
fn shared(family: &[Member], p: f64) -> (Vec<GridFunction>, ErrorFunction) {
    let grid = unit_grid(N);
    let c = family.iter().map(|m| m.wave.holder_coeff(p)).fold(0.0, f64::max);
    let fns = family
        .iter()
        .map(|m| Member { p, ..m.clone() }.sample(grid))
        .collect();
    (fns, power_on(&grid, p, c))
}

/// Pointwise supremum, and infimum of a chain of shifts.
pub fn supremum_and_chain_infimum(family: &[Member], p: f64, shifts: &[f64]) -> Check {
    let (fns, phi) = shared(family, p);
    for f in &fns {
        ensure(convex(f, &phi), || "generated member not in the shared class".into())?;
    }
    ensure(convex(&family_sup(&fns).unwrap(), &phi), || "supremum failed".into())?;
    let chain: Vec<GridFunction> = shifts.iter().map(|&s| fns[0].shift(s)).collect();
    ensure(convex(&family_inf(&chain).unwrap(), &phi), || "chain infimum failed".into())
}

pub fn limsup(family: &[Member], p: f64, w: usize) -> Check {
    let (fns, phi) = shared(family, p);
    for window in [LimsupWindow::LastHalf, LimsupWindow::Last(w)] {
        let ls = limsup_sequence(&fns, window).unwrap();
        ensure(convex(&ls, &phi), || format!("limsup failed with {window:?}"))?;
    }
    Ok(())
}

/// Hölder implies affine.
pub fn holder_is_affine(wave: &Wave, p: f64) -> Check {
    let grid = unit_grid(N);
    let f = wave.sample(grid);
    let phi = power_on(&grid, p, wave.holder_coeff(p));
    ensure(check_phi_holder(&f, &phi, Tol::Auto).unwrap().holds(), || {
        format!("generated wave not Hölder: {wave:?}")
    })?;
    ensure(affine(&f, &phi), || format!("Hölder wave not affine: {wave:?}, p = {p}"))
}

/// Affine iff convex from both sides, on arbitrary data.
pub fn affine_is_convex_both_ways(values: Vec<f64>, p: f64, c: f64) -> Check {
    let grid = unit_grid(N);
    let f = GridFunction::new(grid, values).unwrap();
    let phi = power_on(&grid, p, c);
    let a = affine(&f, &phi);
    let both = convex(&f, &phi) && convex(&f.neg(), &phi);
    ensure(a == both, || format!("affine {a}, convex both ways {both}"))
}

/// Hölder plus convex-class member, and Hölder plus affine-class member.
pub fn holder_plus_member(wave: &Wave, member: &Member, slope: f64, p: f64) -> Check {
    let grid = unit_grid(N);
    let phi = power_on(&grid, p, wave.holder_coeff(p));
    let h = wave.sample(grid);
    let psi = member.error(&grid);
    let total = phi.add(&psi).unwrap();
    let sum = linear_combination(&[1.0, 1.0], &[h.clone(), member.sample(grid)]).unwrap();
    ensure(convex(&sum, &total), || "Hölder + convex member failed".into())?;

    let line = GridFunction::from_fn(grid, |x| slope * x).unwrap();
    let a = linear_combination(&[1.0, 1.0], &[line, member.wave.sample(grid)]).unwrap();
    ensure(affine(&a, &psi), || "generated affine member not affine".into())?;
    let sum = linear_combination(&[1.0, 1.0], &[h, a]).unwrap();
    ensure(affine(&sum, &total), || "Hölder + affine member failed".into())
}

/// Γ is kept by nonnegative scaling, sums and maxima.
pub fn gamma_closure(p: f64, q: f64, a: f64, b: f64, alpha: f64) -> Check {
    let phi = make_power_error(p, 1.0, 64).unwrap().scale(a).unwrap();
    let psi = make_power_error(q, 1.0, 64).unwrap().scale(b).unwrap();
    let gamma = |e: &ErrorFunction| check_gamma(e, Tol::Auto).holds;
    ensure(gamma(&phi) && gamma(&psi), || format!("Φ_{p} or Φ_{q} lacks Γ"))?;
    ensure(gamma(&phi.scale(alpha).unwrap()), || format!("scaling by {alpha}"))?;
    ensure(gamma(&phi.add(&psi).unwrap()), || "sum".into())?;
    ensure(gamma(&phi.max(&psi).unwrap()), || "maximum".into())
}
