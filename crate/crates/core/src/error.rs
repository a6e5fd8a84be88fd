use thiserror::Error;

#[derive(Debug, Error)]
pub enum PoaError {
    #[error("invalid basis pair: {0}")]
    InvalidBasis(String),

    #[error("uncertainty level must lie in [0, 1), got {0}")]
    InvalidUncertainty(f64),

    #[error("invalid game instance: {0}")]
    InvalidGame(String),

    #[error("invalid allocation: {0}")]
    InvalidAllocation(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("joint allocation space of {required} exceeds the enumeration budget of {budget}")]
    BudgetExceeded { required: u128, budget: u64 },

    #[error("size {n} exceeds the supported maximum of {max}")]
    SizeExceeded { n: usize, max: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("degenerate class: {0}")]
    DegenerateClass(String),

    #[error("sweep produced no game with an equilibrium")]
    EmptySweep,

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = PoaError> = std::result::Result<T, E>;
