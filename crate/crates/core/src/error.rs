use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at column {position}: {message}")]
    Parse { position: usize, message: String },

    #[error("party count mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("{n} parties exceeds the configured limit of {limit}")]
    TooManyParties { n: usize, limit: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("feasible region is empty")]
    Infeasible,

    #[error("cone is not pointed (inequality rank {rank} < dimension {dim})")]
    NotPointed { rank: usize, dim: usize },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(position: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            position,
            message: message.into(),
        }
    }

    pub(crate) fn check_parties(expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::DimensionMismatch { expected, found })
        }
    }
}
