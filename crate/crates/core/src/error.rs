use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension: {0} players (need at least 1)")]
    InvalidDimension(usize),

    #[error("invalid rank {k} for {n} players (need 1 <= k <= n)")]
    InvalidRank { n: usize, k: usize },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("quota {0} outside (1/2, 1]")]
    InvalidQuota(f64),

    #[error("the largest weight of a single player is the constant 1; it has no density")]
    DegenerateDistribution,

    #[error("accuracy unsupported: {0}")]
    AccuracyUnsupported(String),

    #[error("invalid arguments: {0}")]
    InvalidArguments(String),

    #[error("budget exceeded: {n} players, limit is {limit}{hint}")]
    BudgetExceeded {
        n: usize,
        limit: usize,
        hint: &'static str,
    },

    #[error("failed to converge in {what}: last estimate {last}, previous {previous}")]
    ConvergenceFailure {
        what: &'static str,
        last: f64,
        previous: f64,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
