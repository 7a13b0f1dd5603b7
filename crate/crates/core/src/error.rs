use thiserror::Error;

use crate::series::SeriesError;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BpsError {
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("polarization on wall")]
    OnWall,
    #[error("non-adjacent chambers")]
    NonAdjacent,
    #[error("integrality violation: {0}")]
    Integrality(String),
    #[error("blow-up parity violation")]
    Parity,
    #[error("unbounded enumeration: {0}")]
    Unbounded(String),
    #[error("missing lower-rank input: {0}")]
    MissingInput(String),
}

pub type Result<T> = std::result::Result<T, BpsError>;
