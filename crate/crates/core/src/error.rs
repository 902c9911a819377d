use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("family `{family}` does not support {what}")]
    UnsupportedFamily { family: &'static str, what: &'static str },

    #[error("support ({a}, {b}) is unbounded; truncate the distribution first (e.g. \"truncate\": 6)")]
    UnboundedSupport { a: f64, b: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// Evaluation too close to a logarithmic singularity of a Hilbert transform.
    #[error("evaluation point {u} lies within {tol:e} of the singularity at {pole}")]
    Pole { u: f64, pole: f64, tol: f64 },

    #[error("principal value oracle did not converge (spread {spread:e})")]
    OracleFailure { spread: f64 },

    #[error("polygon topology: {0}")]
    Topology(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("config: {0}")]
    Config(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

impl Error {
    /// Process exit code: 2 configuration, 3 numerical failure, 4 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_)
            | Error::UnsupportedFamily { .. }
            | Error::UnboundedSupport { .. }
            | Error::InvalidDistribution(_)
            | Error::Config(_) => 2,
            Error::Pole { .. } | Error::OracleFailure { .. } | Error::Topology(_) | Error::Precondition(_) => 3,
            Error::Io { .. } => 4,
        }
    }
}
