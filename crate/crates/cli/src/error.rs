use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const USAGE: u8 = 1;
    pub const IO: u8 = 2;
    pub const VIOLATED: u8 = 3;
    pub const HYPOTHESIS: u8 = 4;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] phi_convex::Error),

    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("cannot encode report: {0}")]
    Json(#[from] serde_json::Error),

    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use phi_convex::Error as E;
        match self {
            CliError::Core(E::Io { .. } | E::Csv { .. } | E::Format { .. }) => exit::IO,
            CliError::Core(
                E::NotZeroAtOrigin
                | E::Precondition { .. }
                | E::NotNondecreasing { .. }
                | E::OuterRejected { .. },
            ) => exit::HYPOTHESIS,
            CliError::Core(_) | CliError::Usage(_) => exit::USAGE,
            CliError::Write { .. } | CliError::Json(_) => exit::IO,
        }
    }
}
