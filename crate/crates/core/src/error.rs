use thiserror::Error;

/// Errors raised by the engine. Analysis verdicts (non-confluent, refuted
/// termination) are reported as values, not errors, except where an
/// operation's precondition is violated.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolyError {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("typing error: {0}")]
    Typing(String),
    #[error("non-associative table: {0}")]
    NonAssociativeTable(String),
    #[error("invalid truncation: {0}")]
    InvalidTruncation(String),
    #[error("step budget of {budget} exceeded while normalising {word}")]
    StepBudgetExceeded { budget: usize, word: String },
    #[error("not convergent: {0}")]
    NotConvergent(String),
    #[error("mismatched endpoints: {0}")]
    MismatchedEndpoints(String),
    #[error("not terminating: {0}")]
    NotTerminating(String),
    #[error("not reduced: {0}")]
    NotReduced(String),
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("boundary mismatch: {0}")]
    BoundaryMismatch(String),
    #[error("inverse below dimension 2: {0}")]
    InvBelowDim2(String),
    #[error("dimension budget exceeded: {0}")]
    DimBudgetExceeded(String),
    #[error("missing cells: {0}")]
    MissingCells(String),
    #[error("degree out of range: {0}")]
    DegreeOutOfRange(String),
}

pub type Result<T> = std::result::Result<T, PolyError>;
