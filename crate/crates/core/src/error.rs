use thiserror::Error;

/// Errors raised by instance validation, learners and the game loop.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("budget of resource {resource} must lie in (0, T], got {budget}")]
    InvalidBudget { resource: usize, budget: f64 },

    #[error("consumption of resource {resource} leaves [-1, 1] after rescaling ({value})")]
    ConsumptionOutOfRange { resource: usize, value: f64 },

    #[error("dual vector is not a distribution over resources (sum {sum}, min entry {min})")]
    NotOnSimplex { sum: f64, min: f64 },

    #[error("value {value} outside the declared range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown context {context} or arm {arm}")]
    UnknownIndex { context: usize, arm: usize },

    #[error("non-finite estimate for arm {arm}")]
    NonFiniteEstimate { arm: usize },

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("simplex hit the pivot limit of {0}")]
    PivotLimit(usize),

    #[error("hard-stop mode requires {0}")]
    HardStopRequirement(String),
}

pub type Result<T> = std::result::Result<T, Error>;
