use std::path::PathBuf;

use thiserror::Error;

use crate::convexity::ConvexityReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("grid functions live on different grids")]
    GridMismatch,

    #[error("error function is not aligned with the grid: {0}")]
    Misaligned(String),

    #[error("invalid error function: {0}")]
    InvalidErrorFunction(String),

    #[error("error function must vanish at the origin")]
    NotZeroAtOrigin,

    #[error("empty family")]
    EmptyFamily,

    #[error("function is not finite at node {index} (x = {x})")]
    UndefinedAt { index: usize, x: f64 },

    #[error("{value} is not on the sample grid")]
    OffGrid { value: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("precondition failed: {what}")]
    Precondition {
        what: String,
        report: Box<ConvexityReport>,
    },

    #[error("error function decreases between samples {index} and {}", index + 1)]
    NotNondecreasing { index: usize },

    #[error("outer function {name} rejected: {reason}")]
    OuterRejected { name: String, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },

    #[error("{path}: {msg}")]
    Format { path: PathBuf, msg: String },
}
