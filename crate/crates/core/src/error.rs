use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse error classes, stable enough to script against.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Io,
    InvalidArgument,
    Numerical,
}

impl ErrorCategory {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::Io => "io",
            ErrorCategory::InvalidArgument => "invalid-argument",
            ErrorCategory::Numerical => "numerical",
        }
    }
}

impl std::fmt::Display for ErrorCategory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0}")]
    InvalidArgument(String),

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    /// A factorization broke down or the system is numerically rank deficient.
    /// `rcond` is the reciprocal 1-norm condition estimate when one was computed.
    #[error("singular {what} (reciprocal condition estimate {rcond:e})")]
    Singular { what: &'static str, rcond: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("row {row}, column {column}: {message}")]
    Parse { row: usize, column: usize, message: String },

    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),

    #[error("at epsilon = {epsilon:e}: {source}")]
    AtEpsilon {
        epsilon: f64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Io { .. } => ErrorCategory::Io,
            Error::InvalidArgument(_) | Error::DimensionMismatch { .. } | Error::Parse { .. } | Error::Json(_) => {
                ErrorCategory::InvalidArgument
            }
            Error::Singular { .. } => ErrorCategory::Numerical,
            Error::AtEpsilon { source, .. } => source.category(),
        }
    }
}
