use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid model: {}", .0.join("; "))]
    InvalidModel(Vec<String>),

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("observation {0} has zero probability under both hypotheses")]
    ZeroProbabilityObservation(String),

    #[error("invalid policy: {0}")]
    InvalidPolicy(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("invalid mixture: {0}")]
    InvalidMixture(String),

    #[error("action tuple {0:?} is unreachable under both hypotheses")]
    UnreachableTuple(Vec<usize>),

    #[error("{needed} joint outcomes exceed the enumeration cap of {cap}; use Monte Carlo evaluation")]
    EnumerationCap { needed: u128, cap: u128 },

    #[error("search needs {needed} evaluation units, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("objective is not finite anywhere on [0, 1]: {0}")]
    DegenerateObjective(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
