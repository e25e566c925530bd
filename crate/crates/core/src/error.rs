use thiserror::Error;

/// Errors raised by the solvers and evaluators in this crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("ground-state solver did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64, history: Vec<f64>, last_iterate: Vec<f64> },

    #[error("shooting bracket not found: {0}")]
    Bracket(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("finite-difference stencil: {0}")]
    Stencil(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Validation failures (bad input) as opposed to numerical failures.
    pub fn is_validation(&self) -> bool {
        matches!(self, Error::Parameter(_) | Error::Config(_) | Error::Precondition(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
