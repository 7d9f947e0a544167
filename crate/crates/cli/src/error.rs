use std::path::PathBuf;

use thiserror::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] otfs_core::Error),

    #[error("{0}")]
    Usage(String),

    #[error("cannot parse config {path}: {source}")]
    Toml {
        path: PathBuf,
        source: toml::de::Error,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("replay mismatch: {0}")]
    ReplayMismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use otfs_core::Error as E;
        match self {
            CliError::Core(E::Capacity { .. }) => EXIT_CAPACITY,
            CliError::Core(E::NonConvergence { .. } | E::InsufficientErrors { .. }) => EXIT_NUMERIC,
            CliError::Core(_) | CliError::Usage(_) | CliError::Toml { .. } => EXIT_CONFIG,
            CliError::Io { .. }
            | CliError::Csv(_)
            | CliError::Json(_)
            | CliError::ReplayMismatch(_) => EXIT_FAILURE,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}
