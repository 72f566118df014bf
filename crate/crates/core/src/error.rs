use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("network must have at least one layer")]
    EmptyNetwork,

    #[error("non-finite entry in {0}")]
    NonFiniteEntry(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cannot parallelize an empty list of networks")]
    EmptyList,

    #[error("power iteration did not converge after {iterations} iterations")]
    ConvergenceFailure { iterations: usize },

    #[error("singular system: {0}")]
    SingularSystem(String),

    #[error("reduced basis needs at least one snapshot parameter")]
    EmptySnapshotSet,

    #[error("network of ~{estimated} nonzero weights exceeds the construction budget of {limit}")]
    ResourceLimit { estimated: u128, limit: u128 },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("malformed document: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn mismatch(msg: impl Into<String>) -> Error {
    Error::DimensionMismatch(msg.into())
}
