use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("element {index} is out of range for a ground set of size {size}")]
    InvalidElement { index: usize, size: usize },

    #[error("element {index} has singleton value {value}, curvature needs f({{s}}) > 0")]
    ZeroSingleton { index: usize, value: f64 },

    #[error("estimator called on an empty sample")]
    EmptyInput,

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("instance too large for exhaustive enumeration: {0}")]
    InstanceTooLarge(String),

    #[error("set violates the matroid constraint: {0}")]
    MatroidViolation(String),

    #[error("instance generation failed: {0}")]
    Generation(String),

    #[error("no demand is reachable from any vehicle")]
    Unreachable,

    #[error("simulation did not finish within {0} steps")]
    StepLimit(usize),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("malformed instance: {0}")]
    Instance(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit status: 2 configuration, 3 instance, 4 guard tripped.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parameter(_) | Error::Config(_) => 2,
            Error::InstanceTooLarge(_) | Error::StepLimit(_) => 4,
            _ => 3,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
