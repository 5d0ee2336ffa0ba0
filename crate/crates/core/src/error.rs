use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("side of {side} vertices exceeds the exact-oracle cap of {cap}")]
    SizeCapExceeded { cap: usize, side: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
