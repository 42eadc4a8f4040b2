use thiserror::Error;

#[derive(Debug, Error)]
pub enum SegreError {
    #[error("shape error: {0}")]
    Shape(String),
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("duplicate point in set")]
    DuplicatePoint,
    #[error("projection center hit: {0}")]
    CenterHit(String),
    #[error("operation requires a prime field, not the rationals")]
    UnsupportedField,
    #[error("field too small: need p >= {needed}, have p = {have}")]
    FieldTooSmall { needed: u64, have: u64 },
    #[error("budget exceeded: task needs about {estimate} rank checks, budget is {budget}")]
    BudgetExceeded { estimate: u128, budget: u64 },
    #[error("retry budget exhausted after {0} attempts")]
    RetriesExhausted(u32),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, SegreError>;
