use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by samplers, schemes and the Monte Carlo harness.
#[derive(Debug, Error)]
pub enum FwisError {
    /// A caller broke a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A matrix that must be positive definite is not. `minor` is the
    /// 1-based order of the first leading minor that failed.
    #[error("matrix is not positive definite: leading minor {minor} has pivot {pivot:e}")]
    Cone { minor: usize, pivot: f64 },

    #[error("invalid time grid: {0}")]
    Grid(String),

    /// Iterative or quadrature routine failed to converge, or a NaN showed up.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// A Monte Carlo path produced a non-finite value.
    #[error("path {path_index} failed at step {step}: {message}")]
    PathFailure {
        path_index: u64,
        step: usize,
        message: String,
    },

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl FwisError {
    pub(crate) fn contract(msg: impl Into<String>) -> Self {
        FwisError::Contract(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        FwisError::Numeric(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        FwisError::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command line tool.
    ///
    /// 0 is reserved for success and 1 for a failed validation check.
    pub fn exit_code(&self) -> i32 {
        match self {
            FwisError::Contract(_) | FwisError::Grid(_) | FwisError::Config(_) => 2,
            FwisError::Io { .. } => 2,
            FwisError::Cone { .. } | FwisError::Numeric(_) | FwisError::PathFailure { .. } => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, FwisError>;
