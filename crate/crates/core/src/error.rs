use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the structure-learning library.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration or generator parameter is outside its feasible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Input data violates a precondition (non-finite values, wrong shape...).
    #[error("invalid input: {0}")]
    Input(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: String, got: String },

    /// A graph that must be acyclic contains a directed cycle.
    #[error("graph contains a directed cycle: {0}")]
    Cyclic(String),

    /// Numerical failure, e.g. a kernel matrix that stays indefinite after jitter escalation.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// Training diverged. Carries the last finite weighted adjacency.
    #[error("training diverged: {reason}")]
    Diverged {
        reason: String,
        last_finite: Option<crate::graph::WeightedAdjacency>,
    },

    #[error("parse error in {path} at line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dims(expected: impl ToString, got: impl ToString) -> Self {
        Error::Dimension {
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
