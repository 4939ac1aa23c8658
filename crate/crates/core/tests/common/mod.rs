//! Generators shared by the integration suites.
//!
//! Functions are built so that their class membership is known in closed
//! form: a convex part is Φ-convex for every Φ, and a wave
//! `amp * sin(freq * x + phase)` on the unit interval is Φ-Hölder for
//! `Φ = 2 amp Φ_0`, `amp freq Φ_{1/2}` and `amp freq Φ_1`.
#![allow(dead_code)]

pub mod classes;

use phi_convex::{make_power_error, ErrorFunction, GridFunction, GridSpec};
use proptest::prelude::*;
use rand::Rng;

#[derive(Debug, Clone)]
pub struct Convex {
    /// `(center, weight)` of each `weight * |x - center|` term, weights >= 0.
    pub kinks: Vec<(f64, f64)>,
    pub quad: f64,
    pub lin: f64,
    pub offset: f64,
}

impl Convex {
    pub fn eval(&self, x: f64) -> f64 {
        let k: f64 = self.kinks.iter().map(|&(c, w)| w * (x - c).abs()).sum();
        k + self.quad * x * x + self.lin * x + self.offset
    }

    pub fn sample(&self, grid: GridSpec) -> GridFunction {
        GridFunction::from_fn(grid, |x| self.eval(x)).unwrap()
    }

    pub fn random(rng: &mut impl Rng) -> Self {
        let kinks = (0..rng.gen_range(0..4))
            .map(|_| (rng.gen_range(0.0..1.0), rng.gen_range(0.0..2.0)))
            .collect();
        Convex {
            kinks,
            quad: rng.gen_range(0.0..3.0),
            lin: rng.gen_range(-2.0..2.0),
            offset: rng.gen_range(-1.0..1.0),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Wave {
    pub amp: f64,
    pub freq: f64,
    pub phase: f64,
}

impl Wave {
    pub fn eval(&self, x: f64) -> f64 {
        self.amp * (self.freq * x + self.phase).sin()
    }

    pub fn sample(&self, grid: GridSpec) -> GridFunction {
        GridFunction::from_fn(grid, |x| self.eval(x)).unwrap()
    }

    /// Smallest coefficient `c` with the wave in the `c Φ_p`-Hölder class on
    /// an interval of length at most 1, for `p` in {0, 0.5, 1}.
    pub fn holder_coeff(&self, p: f64) -> f64 {
        if p == 0.0 {
            2.0 * self.amp
        } else {
            self.amp * self.freq
        }
    }

    pub fn random(rng: &mut impl Rng) -> Self {
        Wave {
            amp: rng.gen_range(0.0..0.3),
            freq: rng.gen_range(0.5..12.0),
            phase: rng.gen_range(0.0..6.3),
        }
    }
}

pub const HOLDER_P: [f64; 3] = [0.0, 0.5, 1.0];

/// Unit interval with `n` interior nodes.
pub fn unit_grid(n: usize) -> GridSpec {
    GridSpec::new(0.0, 1.0, n).unwrap()
}

/// `c Φ_p` sampled once per grid step.
pub fn power_on(grid: &GridSpec, p: f64, c: f64) -> ErrorFunction {
    make_power_error(p, grid.length(), grid.n() + 1)
        .unwrap()
        .scale(c)
        .unwrap()
}

pub fn zero_on(grid: &GridSpec) -> ErrorFunction {
    ErrorFunction::zero(grid.length(), grid.n() + 1).unwrap()
}

/// Convex part plus wave, with the error function that makes it Φ-convex.
#[derive(Debug, Clone)]
pub struct Member {
    pub convex: Convex,
    pub wave: Wave,
    pub p: f64,
}

impl Member {
    pub fn sample(&self, grid: GridSpec) -> GridFunction {
        GridFunction::from_fn(grid, |x| self.convex.eval(x) + self.wave.eval(x)).unwrap()
    }

    pub fn error(&self, grid: &GridSpec) -> ErrorFunction {
        power_on(grid, self.p, self.wave.holder_coeff(self.p))
    }

    pub fn random(rng: &mut impl Rng) -> Self {
        Member {
            convex: Convex::random(rng),
            wave: Wave::random(rng),
            p: HOLDER_P[rng.gen_range(0..3)],
        }
    }
}

pub fn convex_strategy() -> impl Strategy<Value = Convex> {
    (
        prop::collection::vec((0.0..1.0f64, 0.0..2.0f64), 0..4),
        0.0..3.0f64,
        -2.0..2.0f64,
        -1.0..1.0f64,
    )
        .prop_map(|(kinks, quad, lin, offset)| Convex {
            kinks,
            quad,
            lin,
            offset,
        })
}

pub fn wave_strategy() -> impl Strategy<Value = Wave> {
    (0.0..0.3f64, 0.5..12.0f64, 0.0..6.3f64).prop_map(|(amp, freq, phase)| Wave { amp, freq, phase })
}

pub fn member_strategy() -> impl Strategy<Value = Member> {
    (convex_strategy(), wave_strategy(), 0..3usize).prop_map(|(convex, wave, i)| Member {
        convex,
        wave,
        p: HOLDER_P[i],
    })
}

/// Arbitrary bounded grid data, not tied to any class.
pub fn values_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0..2.0f64, n)
}
