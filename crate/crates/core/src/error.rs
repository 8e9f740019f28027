use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, SegError>;

#[derive(Debug, Error)]
pub enum SegError {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    Dimension { expected: String, found: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid threshold {0}: must lie strictly between 0 and 1")]
    InvalidThreshold(f64),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{}: file not found", .0.display())]
    NotFound(PathBuf),

    #[error("{}: unsupported format ({reason})", path.display())]
    UnsupportedFormat { path: PathBuf, reason: String },

    #[error("{}: corrupt file ({reason})", path.display())]
    CorruptFile { path: PathBuf, reason: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl SegError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        SegError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the CLI: 3 for I/O failures, 4 for bad data.
    pub fn exit_code(&self) -> i32 {
        match self {
            SegError::NotFound(_) | SegError::Io { .. } => 3,
            SegError::InvalidConfig(_) | SegError::InvalidThreshold(_) => 2,
            SegError::Dimension { .. }
            | SegError::InvalidInput(_)
            | SegError::UnsupportedFormat { .. }
            | SegError::CorruptFile { .. } => 4,
        }
    }
}
