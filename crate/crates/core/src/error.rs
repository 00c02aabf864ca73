use thiserror::Error;

/// Errors surfaced by the core library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("malformed instance at {field}: {message}")]
    MalformedInstance { field: String, message: String },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unsupported valuation for agent {agent}: {reason}")]
    UnsupportedValuation { agent: usize, reason: String },

    #[error("capacity exceeded: {what} is {got}, limit is {limit}")]
    Capacity { what: &'static str, got: u128, limit: u128 },

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("enumeration budget exceeded: need {needed} states, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },

    #[error("certificate rejected: {0}")]
    Certificate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
