use alloc::string::String;

/// Errors raised by the signature regression core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("a path needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("path dimension must be at least 1")]
    ZeroDimension,
    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("times must be strictly increasing (violated at index {0})")]
    NonIncreasingTimes(usize),
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("signature of dimension {d} truncated at order {m} exceeds the capacity of {limit} coefficients")]
    Capacity { d: usize, m: usize, limit: usize },
    #[error("signature shape mismatch: (d={d1}, m={m1}) vs (d={d2}, m={m2})")]
    ShapeMismatch {
        d1: usize,
        m1: usize,
        d2: usize,
        m2: usize,
    },
    #[error("multi-index entry {digit} out of range 1..={d}")]
    DigitOutOfRange { digit: usize, d: usize },
    #[error("multi-index of length {len} exceeds truncation order {m}")]
    WordTooLong { len: usize, m: usize },
    #[error("linear system is singular or ill-conditioned: {0}")]
    IllConditioned(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("{n} samples cannot be split into {k} folds")]
    TooFewForFolds { n: usize, k: usize },
    #[error("selected order is constant over the whole K_pen grid; widen the grid")]
    DegenerateGrid,
    #[error("covariance factorization failed even with jitter {0:e}")]
    Factorization(f64),
    #[error("next-step values are missing")]
    MissingNextStep,
}

pub type Result<T> = core::result::Result<T, Error>;
