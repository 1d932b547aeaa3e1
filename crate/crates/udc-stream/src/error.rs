use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid key {key}: universe size is {universe}")]
    InvalidKey { key: u64, universe: u64 },
    #[error("incompatible sketch: {0}")]
    IncompatibleSketch(String),
    #[error("oracle limit exceeded: {points} points, limit {limit}")]
    OracleLimitExceeded { points: usize, limit: usize },
    #[error("contract violation: {0}")]
    ContractViolation(String),
    #[error("not ready: {0}")]
    NotReady(String),
    #[error("invalid delta {0}")]
    InvalidDelta(f64),
    #[error("input error at line {line}: {msg}")]
    InputError { line: usize, msg: String },
    #[error("config error: {0}")]
    ConfigError(String),
    #[error("multi-pass algorithm requires a seekable input source")]
    UnsupportedSource,
    #[error("serialization error: {0}")]
    Serialization(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
