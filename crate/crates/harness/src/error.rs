use std::path::PathBuf;

use thiserror::Error;

/// Exit status for configuration errors (`EX_USAGE`).
pub const EXIT_CONFIG: i32 = 64;
/// Exit status for I/O failures (`EX_IOERR`).
pub const EXIT_IO: i32 = 74;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("{0}")]
    Core(#[from] fracnls::Error),

    #[error("i/o error on {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },

    #[error("snapshot format error: {0}")]
    Snapshot(String),

    #[error("serialization error: {0}")]
    Serialize(String),

    #[error("diagnostic failed: {0}")]
    Diagnostic(String),
}

impl HarnessError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        HarnessError::Io { path: path.into(), source }
    }

    /// Process exit status for a failure that prevents a run from starting
    /// or finishing its outputs.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Snapshot(_) => EXIT_CONFIG,
            HarnessError::Io { .. } => EXIT_IO,
            HarnessError::Core(_) | HarnessError::Serialize(_) | HarnessError::Diagnostic(_) => 4,
        }
    }
}

impl From<serde_json::Error> for HarnessError {
    fn from(e: serde_json::Error) -> Self {
        HarnessError::Serialize(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, HarnessError>;
