use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoreError {
    #[error("invalid world configuration: {0}")]
    InvalidWorld(String),
    #[error("invalid trial configuration: {0}")]
    InvalidTrial(String),
    #[error("likert value {0} outside the 1..=9 scale")]
    LikertOutOfRange(i64),
    #[error("series length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("non-stationary or non-invertible parameters: {0}")]
    Nonstationary(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("config parse error: {0}")]
    Config(String),
}
