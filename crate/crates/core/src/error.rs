use thiserror::Error;

use crate::discrete::ExactSolution;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Precedence edges and processor orders together form a cycle.
    #[error("execution graph contains a cycle through task {0:?}")]
    Cycle(String),

    /// A task is missing from the allocation, listed twice, or unknown.
    #[error("allocation error: {0}")]
    Coverage(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("task {id:?} completes {done} work units, needs {required}")]
    WorkDeficit { id: String, done: f64, required: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("linear program is infeasible")]
    LpInfeasible,

    #[error("linear program numerical failure: {0}")]
    LpNumerical(String),

    #[error("task {0:?} has zero total duration")]
    DegenerateDuration(String),

    /// The node budget ran out. Carries the best schedule found so far.
    #[error("node budget of {budget} exhausted")]
    BudgetExceeded {
        budget: u64,
        incumbent: Option<Box<ExactSolution>>,
    },

    #[error("speed {speed} at position {index} exceeds the top admissible speed {top}")]
    Range { index: usize, speed: f64, top: f64 },
}

impl Error {
    /// Whether the error means "no schedule meets the deadline".
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Infeasible(_) | Error::LpInfeasible)
    }
}
