use std::fmt;
use std::str::FromStr;

use crate::gridfn::{GridFunction, GridSpec};
use crate::{Error, Result};

/// Closed-form test functions.
#[derive(Debug, Clone, PartialEq)]
pub enum CatalogEntry {
    /// `scale * |x|^p`
    Power { p: f64, scale: f64 },
    /// `scale * |x - center|`
    Abs { center: f64, scale: f64 },
    /// `a x^2 + b x + c`
    Quadratic { a: f64, b: f64, c: f64 },
    /// `-scale * x^2`
    Concave { scale: f64 },
    /// `x^2 + amplitude * sin(frequency * x)`; the perturbation is bounded by `amplitude`.
    NoisyConvex { amplitude: f64, frequency: f64 },
    /// `amplitude * sin(frequency * x + phase)`
    Sine { amplitude: f64, frequency: f64, phase: f64 },
    /// Triangle wave through 0 at multiples of `period`, with slopes `±slope`.
    Sawtooth { slope: f64, period: f64 },
    /// Linear interpolation through sorted knots, extended linearly past the ends.
    PiecewiseLinear { knots: Vec<(f64, f64)> },
}

impl CatalogEntry {
    pub fn name(&self) -> &'static str {
        match self {
            CatalogEntry::Power { .. } => "power",
            CatalogEntry::Abs { .. } => "abs",
            CatalogEntry::Quadratic { .. } => "quadratic",
            CatalogEntry::Concave { .. } => "concave",
            CatalogEntry::NoisyConvex { .. } => "noisy",
            CatalogEntry::Sine { .. } => "sine",
            CatalogEntry::Sawtooth { .. } => "sawtooth",
            CatalogEntry::PiecewiseLinear { .. } => "pwl",
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            CatalogEntry::Power { p, scale } => scale * x.abs().powf(p),
            CatalogEntry::Abs { center, scale } => scale * (x - center).abs(),
            CatalogEntry::Quadratic { a, b, c } => (a * x + b) * x + c,
            CatalogEntry::Concave { scale } => -scale * x * x,
            CatalogEntry::NoisyConvex {
                amplitude,
                frequency,
            } => x * x + amplitude * (frequency * x).sin(),
            CatalogEntry::Sine {
                amplitude,
                frequency,
                phase,
            } => amplitude * (frequency * x + phase).sin(),
            CatalogEntry::Sawtooth { slope, period } => {
                let r = (x / period).rem_euclid(1.0);
                slope * period * r.min(1.0 - r)
            }
            CatalogEntry::PiecewiseLinear { ref knots } => eval_pwl(knots, x),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            CatalogEntry::Sawtooth { period, .. } if !(*period > 0.0) => {
                Err(Error::InvalidInput("sawtooth period must be positive".into()))
            }
            CatalogEntry::PiecewiseLinear { knots } => {
                if knots.len() < 2 {
                    return Err(Error::InvalidInput("pwl needs at least two knots".into()));
                }
                if knots.windows(2).any(|w| !(w[0].0 < w[1].0)) {
                    return Err(Error::InvalidInput(
                        "pwl knots must have strictly increasing x".into(),
                    ));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

fn eval_pwl(knots: &[(f64, f64)], x: f64) -> f64 {
    let seg = match knots.iter().position(|&(kx, _)| kx > x) {
        Some(0) => 0,
        Some(i) => i - 1,
        None => knots.len() - 2,
    };
    let (x0, y0) = knots[seg];
    let (x1, y1) = knots[seg + 1];
    y0 + (y1 - y0) * (x - x0) / (x1 - x0)
}

/// Evaluates `entry` at every node of `grid`.
pub fn sample_catalog(entry: &CatalogEntry, grid: &GridSpec) -> Result<GridFunction> {
    entry.validate()?;
    let values: Vec<f64> = grid.nodes().map(|x| entry.eval(x)).collect();
    if let Some(index) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::UndefinedAt {
            index,
            x: grid.node(index),
        });
    }
    GridFunction::new(*grid, values)
}

impl fmt::Display for CatalogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CatalogEntry::Power { p, scale } => write!(f, "power:{p}:{scale}"),
            CatalogEntry::Abs { center, scale } => write!(f, "abs:{center}:{scale}"),
            CatalogEntry::Quadratic { a, b, c } => write!(f, "quadratic:{a}:{b}:{c}"),
            CatalogEntry::Concave { scale } => write!(f, "concave:{scale}"),
            CatalogEntry::NoisyConvex {
                amplitude,
                frequency,
            } => write!(f, "noisy:{amplitude}:{frequency}"),
            CatalogEntry::Sine {
                amplitude,
                frequency,
                phase,
            } => write!(f, "sine:{amplitude}:{frequency}:{phase}"),
            CatalogEntry::Sawtooth { slope, period } => write!(f, "sawtooth:{slope}:{period}"),
            CatalogEntry::PiecewiseLinear { knots } => {
                write!(f, "pwl")?;
                for (x, y) in knots {
                    write!(f, ":{x}:{y}")?;
                }
                Ok(())
            }
        }
    }
}

/// Parses `name[:param...]`, e.g. `power:2`, `abs:0.5:1`, `quadratic:1:0:-1`,
/// `pwl:0:0:0.5:1:1:0`. Omitted trailing parameters take their defaults.
impl FromStr for CatalogEntry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split(':');
        let name = parts.next().unwrap_or_default();
        let params: Vec<f64> = parts
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidInput(format!("bad number {p:?} in {s:?}")))
            })
            .collect::<Result<_>>()?;
        let arity = |min: usize, max: usize| -> Result<()> {
            if params.len() < min || params.len() > max {
                Err(Error::InvalidInput(format!(
                    "{name} takes {min}..={max} parameters, got {}",
                    params.len()
                )))
            } else {
                Ok(())
            }
        };
        let get = |i: usize, default: f64| params.get(i).copied().unwrap_or(default);
        let entry = match name {
            "power" => {
                arity(1, 2)?;
                CatalogEntry::Power {
                    p: params[0],
                    scale: get(1, 1.0),
                }
            }
            "abs" => {
                arity(0, 2)?;
                CatalogEntry::Abs {
                    center: get(0, 0.0),
                    scale: get(1, 1.0),
                }
            }
            "quadratic" => {
                arity(0, 3)?;
                CatalogEntry::Quadratic {
                    a: get(0, 1.0),
                    b: get(1, 0.0),
                    c: get(2, 0.0),
                }
            }
            "concave" => {
                arity(0, 1)?;
                CatalogEntry::Concave { scale: get(0, 1.0) }
            }
            "noisy" => {
                arity(1, 2)?;
                CatalogEntry::NoisyConvex {
                    amplitude: params[0],
                    frequency: get(1, 50.0),
                }
            }
            "sine" => {
                arity(0, 3)?;
                CatalogEntry::Sine {
                    amplitude: get(0, 1.0),
                    frequency: get(1, 1.0),
                    phase: get(2, 0.0),
                }
            }
            "sawtooth" => {
                arity(0, 2)?;
                CatalogEntry::Sawtooth {
                    slope: get(0, 1.0),
                    period: get(1, 0.25),
                }
            }
            "pwl" => {
                if params.len() < 4 || !params.len().is_multiple_of(2) {
                    return Err(Error::InvalidInput(
                        "pwl takes an even number (>= 4) of parameters x1:y1:x2:y2...".into(),
                    ));
                }
                CatalogEntry::PiecewiseLinear {
                    knots: params.chunks(2).map(|c| (c[0], c[1])).collect(),
                }
            }
            other => {
                return Err(Error::InvalidInput(format!("unknown catalog entry {other:?}")));
            }
        };
        entry.validate()?;
        Ok(entry)
    }
}
