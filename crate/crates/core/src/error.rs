use thiserror::Error;

/// Errors raised by the computational modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid one-site potential: {test} test failed ({detail})")]
    InvalidPotential { test: &'static str, detail: String },

    #[error("invalid site distribution: {0}")]
    InvalidDistribution(String),

    #[error("budget exceeded: {what} needs {needed}, budget is {budget}")]
    BudgetExceeded { what: &'static str, needed: u128, budget: u128 },

    #[error("site {site} lies outside the field box of radius {radius}")]
    OutsideBox { site: String, radius: usize },

    #[error("lambda grid too short: objective still increasing at lambda = {lambda_end} (needs up to {lambda_needed})")]
    GridTooShort { lambda_end: f64, lambda_needed: f64 },

    #[error("refinement required: {0}")]
    NeedsRefinement(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("internal inconsistency: {0}")]
    Inconsistent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
