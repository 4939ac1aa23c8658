//! Approximate convexity on uniform grids.
//!
//! A real function `f` on an open interval `I` is Φ-convex when every chord
//! inequality holds up to a length-dependent error `Φ`:
//!
//! ```text
//! f(tx + (1-t)y) <= t f(x) + (1-t) f(y) + t Φ((1-t)|x-y|) + (1-t) Φ(t|x-y|)
//! ```
//!
//! This crate samples `f` at the interior nodes of a uniform grid and `Φ` on a
//! compatible difference grid, then provides exhaustive verifiers, slope
//! certificates, the error-function algebra (Γ property, γ-transform,
//! Γ-envelope, Φ* transform) and the lower Φ-convex envelope together with
//! the sandwich decision procedure.
//!
//! Every verifier scans *all* grid pairs or triples; nothing is sampled at
//! random. Verdicts compare a worst margin against an explicit absolute
//! tolerance, see [`Tol`].
//!
//! ```
//! use phi_convex::{check_phi_convex, make_power_error, sandwich, CatalogEntry, GridSpec,
//!     sample_catalog, SandwichStatus, Tol};
//!
//! let grid = GridSpec::new(0.0, 1.0, 63).unwrap();
//! let phi = make_power_error(1.0, 1.0, 64).unwrap();
//! let f = sample_catalog(&"abs:0.5".parse::<CatalogEntry>().unwrap(), &grid).unwrap();
//! assert!(check_phi_convex(&f, &phi, Tol::Auto).unwrap().holds());
//!
//! let g = f.shift(-0.1);
//! let report = sandwich(&g, &f, &phi).unwrap();
//! assert_eq!(report.status, SandwichStatus::Holds);
//! ```

// `!(x > 0.0)` rejects NaN along with nonpositive values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod convexity;
pub mod envelope;
pub mod errorfn;
pub mod gridfn;

mod error;
mod scan;
mod tol;

pub use convexity::{
    build_absolute_slope_certificate, build_slope_certificate, check_absolute_slope_star_holder,
    check_jensen, check_phi_affine, check_phi_convex, check_phi_convex_definitional,
    check_phi_holder, check_phi_monotone, check_slope_star_monotone, compose_check,
    verify_absolute_slope_certificate, verify_slope_certificate, ConvexityReport, OuterFunction,
    SlopeCertificate, SlopeKind, Verdict, Witness,
};
pub use envelope::{
    check_psi_convex, envelope_fixed_point, envelope_step, psi_from_phi, sandwich,
    EnvelopeOptions, EnvelopeResult, SandwichReport, SandwichStatus,
};
pub use error::{Error, Result};
pub use errorfn::{
    check_chain_inequality, check_gamma, check_ratio_subadditive, check_sqrt_subadditive,
    check_t2_decreasing, gamma_envelope, gamma_transform, make_power_error, star_transform,
    EnvelopeTrace, ErrorFunction, GammaReport, MonotoneReport,
};
pub use gridfn::{
    family_inf, family_sup, limsup_sequence, linear_combination, sample_catalog, CatalogEntry,
    GridFunction, GridSpec, LimsupWindow,
};
pub use tol::Tol;
