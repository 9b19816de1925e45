use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("length mismatch: {what} has {got} rows, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("series too short: need more than {needed} observations, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("design matrix is rank deficient; columns {columns:?} are linear combinations of earlier columns")]
    RankDeficient { columns: Vec<usize> },
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("autoregressive polynomial is not stationary")]
    Nonstationary,
    #[error("moving-average polynomial is not invertible")]
    NonInvertible,
    #[error("invalid argument: {0}")]
    Invalid(String),
}
