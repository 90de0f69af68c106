use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid sparsity: {0}")]
    InvalidSparsity(String),

    /// Requested a nonzero noise level on data that are identically zero.
    #[error("noise level undefined: K*x0 = 0 with epsilon > 0")]
    DegenerateSignal,

    #[error("relative error undefined for zero ground truth")]
    ZeroGroundTruth,

    #[error("invalid residual target: {0}")]
    InvalidTarget(String),

    #[error("unsupported Hadamard order {0}: must be a power of two")]
    UnsupportedOrder(usize),

    #[error("unsupported transform size {0}: must be a power of two")]
    UnsupportedSize(usize),

    #[error("sensor at ({0}, {1}, {2}) is too close to the current shell")]
    SingularKernel(f64, f64, f64),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
