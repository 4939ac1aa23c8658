//! Sampled functions on uniform grids and the pointwise family operations
//! used by the class-structure checks.

mod catalog;
pub mod io;

use serde::Serialize;

use crate::{Error, Result};

pub use catalog::{sample_catalog, CatalogEntry};

/// Relative tolerance used when matching coordinates to grid nodes.
pub(crate) const NODE_REL_TOL: f64 = 1e-9;

/// Uniform discretization of the open interval `(a, b)`.
///
/// Only the `n` interior nodes `a + k h`, `k = 1..=n`, with `h = (b - a) / (n + 1)`
/// are sampled; the endpoints never are.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    a: f64,
    b: f64,
    n: usize,
}

impl GridSpec {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() {
            return Err(Error::InvalidGrid(format!("endpoints must be finite, got ({a}, {b})")));
        }
        if a >= b {
            return Err(Error::InvalidGrid(format!("need a < b, got ({a}, {b})")));
        }
        if n < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 nodes, got {n}")));
        }
        let grid = GridSpec { a, b, n };
        if !(grid.step() > 0.0) {
            return Err(Error::InvalidGrid("step underflows to zero".into()));
        }
        Ok(grid)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of interior nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn step(&self) -> f64 {
        (self.b - self.a) / (self.n + 1) as f64
    }

    /// Length of the interval, `b - a`.
    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    /// Coordinate of the node with 0-based index `k`.
    pub fn node(&self, k: usize) -> f64 {
        self.a + (k + 1) as f64 * self.step()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(move |k| self.node(k))
    }

    /// Index of the node at `x`, if `x` lies on the grid.
    pub fn node_index(&self, x: f64) -> Option<usize> {
        let h = self.step();
        let pos = (x - self.a) / h - 1.0;
        let k = pos.round();
        if (pos - k).abs() > NODE_REL_TOL * (1.0 + k.abs()) || k < 0.0 || k >= self.n as f64 {
            return None;
        }
        Some(k as usize)
    }

    /// Same node count and endpoints equal up to relative rounding.
    pub fn is_compatible(&self, other: &GridSpec) -> bool {
        let scale = NODE_REL_TOL * self.length().max(other.length());
        self.n == other.n && (self.a - other.a).abs() <= scale && (self.b - other.b).abs() <= scale
    }
}

/// A real function sampled at the interior nodes of a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: GridSpec,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::LengthMismatch {
                expected: grid.n,
                actual: values.len(),
            });
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::UndefinedAt {
                index,
                x: grid.node(index),
            });
        }
        Ok(GridFunction { grid, values })
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, grid.nodes().map(f).collect())
    }

    pub fn constant(grid: GridSpec, c: f64) -> Result<Self> {
        Self::new(grid, vec![c; grid.n])
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn neg(&self) -> GridFunction {
        self.map(|v| -v)
    }

    pub fn scale(&self, alpha: f64) -> GridFunction {
        self.map(|v| alpha * v)
    }

    pub fn shift(&self, c: f64) -> GridFunction {
        self.map(|v| v + c)
    }

    fn map(&self, op: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            grid: self.grid,
            values: self.values.iter().map(|&v| op(v)).collect(),
        }
    }

    /// Largest `|self - other|` over the nodes.
    pub fn sup_distance(&self, other: &GridFunction) -> Result<f64> {
        ensure_same_grid(&self.grid, &other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Largest `self - other` (positive where `self` exceeds `other`).
    pub fn max_excess(&self, other: &GridFunction) -> Result<f64> {
        ensure_same_grid(&self.grid, &other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(f64::NEG_INFINITY, |m, (a, b)| m.max(a - b)))
    }
}

pub(crate) fn ensure_same_grid(a: &GridSpec, b: &GridSpec) -> Result<()> {
    if a.is_compatible(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch)
    }
}

fn common_grid(fns: &[GridFunction]) -> Result<GridSpec> {
    let first = fns.first().ok_or(Error::EmptyFamily)?;
    for f in &fns[1..] {
        ensure_same_grid(&first.grid, &f.grid)?;
    }
    Ok(first.grid)
}

/// Pointwise `sum_i coeffs[i] * fns[i]`.
pub fn linear_combination(coeffs: &[f64], fns: &[GridFunction]) -> Result<GridFunction> {
    if coeffs.len() != fns.len() {
        return Err(Error::LengthMismatch {
            expected: fns.len(),
            actual: coeffs.len(),
        });
    }
    let grid = common_grid(fns)?;
    let mut values = vec![0.0; grid.n];
    for (c, f) in coeffs.iter().zip(fns) {
        for (acc, v) in values.iter_mut().zip(&f.values) {
            *acc += c * v;
        }
    }
    GridFunction::new(grid, values)
}

fn fold_family(fns: &[GridFunction], pick: fn(f64, f64) -> f64) -> Result<GridFunction> {
    let grid = common_grid(fns)?;
    let mut values = fns[0].values.clone();
    for f in &fns[1..] {
        for (acc, &v) in values.iter_mut().zip(&f.values) {
            *acc = pick(*acc, v);
        }
    }
    GridFunction::new(grid, values)
}

/// Pointwise supremum of a nonempty family.
pub fn family_sup(fns: &[GridFunction]) -> Result<GridFunction> {
    fold_family(fns, f64::max)
}

/// Pointwise infimum of a nonempty family.
pub fn family_inf(fns: &[GridFunction]) -> Result<GridFunction> {
    fold_family(fns, f64::min)
}

/// How much of a finite sequence the limsup looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LimsupWindow {
    /// The final `ceil(len / 2)` terms.
    #[default]
    LastHalf,
    /// The final `w` terms (clamped to `1..=len`).
    Last(usize),
}

/// `inf_n sup_{k >= n} f_k`, with `n` ranging over the starts that keep at
/// least the window's worth of terms in the tail.
///
/// A finite sequence has no true limit; `Last(1)` gives the literal
/// inf-of-tail-sups over the whole sequence, which is its final term.
pub fn limsup_sequence(fns: &[GridFunction], window: LimsupWindow) -> Result<GridFunction> {
    let grid = common_grid(fns)?;
    let len = fns.len();
    let w = match window {
        LimsupWindow::LastHalf => len.div_ceil(2),
        LimsupWindow::Last(w) => w.clamp(1, len),
    };
    // tail_sup[n] = sup_{k >= n} f_k, built right to left.
    let mut tail = fns[len - 1].values.clone();
    let mut result = if w == 1 {
        tail.clone()
    } else {
        vec![f64::INFINITY; tail.len()]
    };
    for n in (0..len - 1).rev() {
        for (t, &v) in tail.iter_mut().zip(&fns[n].values) {
            *t = t.max(v);
        }
        if n <= len - w {
            for (r, &t) in result.iter_mut().zip(&tail) {
                *r = r.min(t);
            }
        }
    }
    GridFunction::new(grid, result)
}
