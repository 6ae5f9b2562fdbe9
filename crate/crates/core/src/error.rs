use thiserror::Error;

/// Errors produced by the tensor, evolution and contraction layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("invalid model: {0}")]
    Model(String),
    #[error("environment failure: {0}")]
    Environment(String),
    #[error("degenerate reduced density matrix: trace magnitude {0:e}")]
    Degenerate(f64),
    #[error("non-finite tensor elements at beta = {beta}")]
    NonFinite { beta: f64 },
    #[error("checkpoint format: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
