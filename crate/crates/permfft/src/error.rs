//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("vector too short: length {len}, need at least {min}")]
    TooShort { len: usize, min: usize },

    #[error("non-finite entry {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("invalid permutation image: {reason}")]
    InvalidPermutation { reason: String },

    #[error("shift exponent {k} out of range for length {n}")]
    ShiftOutOfRange { k: usize, n: usize },

    #[error("invalid accuracy parameter {name} = {value}; {reason}")]
    InvalidAccuracy {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("requested {requested} batches exceeds cap {cap}")]
    BatchCapExceeded { requested: u64, cap: u64 },

    #[error("problem size {n} exceeds limit {limit} for {what}")]
    SizeLimit {
        n: usize,
        limit: usize,
        what: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("internal consistency check failed: {0}")]
    Inconsistency(String),
}
