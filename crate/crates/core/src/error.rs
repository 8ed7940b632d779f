use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("alphabet is empty")]
    EmptyAlphabet,

    #[error("row {row} has {found} entries, expected {expected}")]
    RaggedTable {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("entry ({row}, {col}) = {value} is negative")]
    NegativeMass { row: usize, col: usize, value: f64 },

    #[error("entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("total mass {sum} differs from 1 by more than 1e-9")]
    NotNormalized { sum: f64 },

    #[error("{what}: expected {expected} labels, found {found}")]
    LabelCount {
        what: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid encoder: {0}")]
    InvalidEncoder(String),

    #[error("invalid estimator: {0}")]
    InvalidEstimator(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("nu = {nu} outside the open interval (0, {upper})")]
    NuOutOfRange { nu: f64, upper: f64 },

    #[error("search space of {needed} candidates exceeds budget {budget}; use local search")]
    BudgetExceeded { needed: u128, budget: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
