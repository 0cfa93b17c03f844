use thiserror::Error;

/// Errors shared across the whole laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix must have at least one row and one column")]
    EmptyMatrix,
    #[error("non-finite entry at row {row}, col {col}")]
    NonFiniteEntry { row: usize, col: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("cap exceeded: {msg}")]
    CapExceeded { msg: String },
    #[error("degenerate planted size: S = {s} outside [1, T = {t}]")]
    DegenerateSize { s: i64, t: usize },
    #[error("no perfect square in ({n}, {two_n}]")]
    NoSquares { n: u64, two_n: u64 },
    #[error("interval out of range: {msg}")]
    IntervalOutOfRange { msg: String },
    #[error("unsupported: {msg}")]
    Unsupported { msg: String },
    #[error("DFT grid of length {grid_len} cannot resolve sums up to 2*{max}")]
    GridTooSmall { grid_len: u64, max: u64 },
    #[error("budget exceeded: {msg}")]
    BudgetExceeded { msg: String },
    #[error("frequency at index {index} is not an integer multiple of 2*pi")]
    NonIntegerFrequencies { index: usize },
    #[error("not a symmetric arithmetic progression: {msg}")]
    NotAnAp { msg: String },
    #[error("invalid argument: {msg}")]
    InvalidArgument { msg: String },
    #[error("parse error: {msg}")]
    Parse { msg: String },
}

impl Error {
    pub(crate) fn cap(msg: impl Into<String>) -> Self {
        Error::CapExceeded { msg: msg.into() }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument { msg: msg.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
