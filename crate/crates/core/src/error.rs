use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A model or estimator parameter is outside its valid domain.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// The circulant embedding produced a covariance spectrum that is not
    /// nonnegative even after enlarging the embedding.
    #[error("circulant embedding of size {size} has negative eigenvalue {eigenvalue:e}; doubling the embedding did not help")]
    Embedding { size: usize, eigenvalue: f64 },

    #[error("series of length {len} is too short: {reason}")]
    Size { len: usize, reason: String },

    /// Two inputs that must agree (lengths, grids, methods) do not.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("outside domain: {0}")]
    Domain(String),

    #[error("exponential transform overflows at index {index} (value {value})")]
    Overflow { index: usize, value: f64 },

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {reason}")]
    Parse {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("config {path}: {reason}")]
    Config { path: String, reason: String },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by caller-supplied parameters or configuration,
    /// as opposed to failures while running.
    pub fn is_usage(&self) -> bool {
        matches!(
            self,
            Error::Parameter { .. } | Error::Domain(_) | Error::Config { .. }
        )
    }
}
