use std::path::PathBuf;

use thiserror::Error;

use crate::dataset::DataError;
use crate::gateway::GatewayError;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("checkpoint in {dir} belongs to config {found}, current config is {expected}")]
    StaleCheckpoint { dir: PathBuf, expected: String, found: String },
    #[error("run stopped after {0} questions")]
    Interrupted(usize),
    #[error(transparent)]
    Core(#[from] consensus_core::Error),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl RunError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        RunError::Io { path: path.into(), source }
    }

    /// Process exit status for the command line.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::StaleCheckpoint { .. } => 2,
            RunError::Gateway(_) => 3,
            RunError::Data(_) => 4,
            RunError::Core(e) => match e {
                consensus_core::Error::InvalidThresholds { .. }
                | consensus_core::Error::InvalidK { .. }
                | consensus_core::Error::UnsupportedFormat(_)
                | consensus_core::Error::InvalidArgument(_) => 2,
                _ => 4,
            },
            RunError::Interrupted(_) | RunError::Io { .. } => 1,
        }
    }
}

pub type Result<T, E = RunError> = std::result::Result<T, E>;
