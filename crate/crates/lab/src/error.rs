use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid spec {path}: {source}")]
    SpecJson {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{0}")]
    Core(#[from] graphing_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write output: {0}")]
    Write(#[from] std::io::Error),
    #[error("cannot write csv: {0}")]
    Csv(#[from] csv::Error),
}

impl LabError {
    /// Process exit status: 2 for invalid input, 3 for resource caps.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::SpecJson { .. } | LabError::Usage(_) => 2,
            LabError::Core(graphing_core::Error::NodeCap { .. }) => 3,
            LabError::Core(graphing_core::Error::Tower(_)) => 1,
            LabError::Core(_) => 2,
            LabError::Read { .. } | LabError::Write(_) | LabError::Csv(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;

/// Exit status for results left unresolved when resolution was required.
pub const EXIT_UNRESOLVED: i32 = 4;
