use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("polarization magnitude {0} exceeds 1")]
    UnphysicalPolarization(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("not a valid density matrix: {0}")]
    InvalidDensity(String),
    #[error("zero-weight configuration: {0}")]
    ZeroWeight(String),
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("velocity magnitude {0} is not below 1")]
    Superluminal(f64),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
