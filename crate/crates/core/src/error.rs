use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("measurement space mismatch: {0}")]
    SpaceMismatch(String),

    #[error("value at node {index} is {value}, expected {expected}")]
    Domain {
        index: usize,
        value: f64,
        expected: &'static str,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("non-finite exponent at node {index} in step {step}")]
    NonFiniteExponent { step: usize, index: usize },

    #[error("mass underflow in step {step}: integral {mass:e}")]
    MassUnderflow { step: usize, mass: f64 },

    #[error("EM update undefined: {0}")]
    EmUndefined(String),

    #[error("truth construction failed: {0}")]
    Truth(String),

    #[error("trace rejected: {0}")]
    Trace(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
