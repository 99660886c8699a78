use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A matrix or series had a zero dimension.
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    /// Shapes of two operands do not agree.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// An input contained NaN or an infinity.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// A scalar parameter was outside its domain.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An internal structural invariant was violated by caller-supplied data.
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// The requested kind does not have a gradient.
    #[error("{0} is not differentiable")]
    NotDifferentiable(&'static str),

    /// The operation is not available for the requested configuration.
    #[error("not implemented: {0}")]
    NotImplemented(String),

    /// Brute-force enumeration would exceed its size guard.
    #[error("enumeration of {count} alignments exceeds the guard of {limit}")]
    TooLarge { count: String, limit: u64 },

    /// A numerical routine failed (overflow, non-finite objective, ...).
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A dataset or series file could not be parsed.
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line tool for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Io { .. } | Error::Json(_) | Error::Csv(_) => 2,
            Error::EmptyInput(_) | Error::DimensionMismatch(_) | Error::NonFinite(_) => 2,
            Error::Numerical(_) | Error::Invariant(_) => 3,
            _ => 1,
        }
    }
}
