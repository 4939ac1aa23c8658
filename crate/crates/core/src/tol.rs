/// Absolute tolerance for "holds" verdicts.
///
/// `Auto` resolves to `1e-9 * (1 + scale)` where `scale` is the largest sample
/// magnitude of the objects under test (the error function, and the grid
/// function where one is involved).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Tol {
    #[default]
    Auto,
    Abs(f64),
}

pub(crate) const AUTO_REL: f64 = 1e-9;

impl Tol {
    pub fn resolve(self, scale: f64) -> f64 {
        match self {
            Tol::Auto => AUTO_REL * (1.0 + scale.abs()),
            Tol::Abs(t) => t,
        }
    }
}
