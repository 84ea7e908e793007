use std::fmt;
use std::io;

#[derive(Debug)]
pub enum CliError {
    Core(wvpower::Error),
    Usage(String),
    Io(io::Error, String),
    Csv(csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use wvpower::Error as E;
        match self {
            CliError::Io(..) | CliError::Csv(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Core(e) => match e {
                E::ConvergenceFailure { .. } | E::AccuracyUnsupported(_) => 3,
                E::BudgetExceeded { .. } => 4,
                _ => 2,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{}: {e}", core_error_name(e)),
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Io(e, what) => write!(f, "I/O error on {what}: {e}"),
            CliError::Csv(e) => write!(f, "CSV error: {e}"),
        }
    }
}

fn core_error_name(e: &wvpower::Error) -> &'static str {
    use wvpower::Error as E;
    match e {
        E::InvalidDimension(_) => "invalid-dimension",
        E::InvalidRank { .. } => "invalid-rank",
        E::InvalidWeights(_) => "invalid-weights",
        E::InvalidQuota(_) => "invalid-quota",
        E::DegenerateDistribution => "degenerate-distribution",
        E::AccuracyUnsupported(_) => "accuracy-unsupported",
        E::InvalidArguments(_) => "invalid-arguments",
        E::BudgetExceeded { .. } => "budget-exceeded",
        E::ConvergenceFailure { .. } => "convergence-failure",
    }
}

impl std::error::Error for CliError {}

impl From<wvpower::Error> for CliError {
    fn from(e: wvpower::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Csv(e)
    }
}
