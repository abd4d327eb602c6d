use std::io;

use crate::solver::JointLoss;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected n={expected}, found n={found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dimension n={n} is outside the supported range 0..={max}")]
    UnsupportedDimension { n: usize, max: usize },

    #[error("exhaustive enumeration of {what} refused: {size} exceeds the cap {cap}")]
    EnumerationCap {
        what: &'static str,
        size: u128,
        cap: u128,
    },

    #[error("invalid subset: {0}")]
    InvalidSubset(String),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("the function is identically zero")]
    ZeroFunction,

    #[error("oracle failure on request `{request}`: {reason}")]
    Oracle { request: String, reason: String },

    #[error("lasso did not converge after {sweeps} sweeps (last max coefficient change {last_delta:e})")]
    NotConverged { sweeps: usize, last_delta: f64 },

    #[error("subgradient descent diverged at epoch {epoch}")]
    Diverged {
        epoch: usize,
        trajectory: Vec<JointLoss>,
    },

    #[error("rank-deficient design: {0}")]
    RankDeficient(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found })
        }
    }
}
