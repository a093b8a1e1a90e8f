use thiserror::Error;

/// Errors raised by the algebra, the dense oracle and the experiment layer.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("local dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: u32, right: u32 },

    #[error("local dimension must be at least 2, got {0}")]
    InvalidDimension(u32),

    #[error("index {index} out of range 0..{bound}")]
    IndexOutOfRange { index: i64, bound: i64 },

    #[error("site {site} lies outside the chain 0..{len}")]
    SiteOutsideChain { site: i64, len: usize },

    #[error("dense dimension {dim} exceeds the configured cap {cap}")]
    CapExceeded { dim: u128, cap: usize },

    #[error("hopping is not hermitian at offset {offset}")]
    NotHermitian { offset: i64 },

    #[error("momentum grid of {n} points is too small (need at least {needed})")]
    GridTooSmall { n: usize, needed: usize },

    #[error("grid size {n} is not divisible by {by}")]
    GridNotDivisible { n: usize, by: usize },

    #[error("chain length {len} is not divisible by block size {k}")]
    BlockMismatch { len: usize, k: usize },

    #[error("hopping reach {reach} does not fit in a chain of {len} sites")]
    SupportTooLarge { reach: i64, len: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("linear algebra failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, LabError>;
