use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("program body has a jump escaping the body at instruction {at}")]
    EscapingJump { at: usize },

    #[error("index too large for a machine register: {0}")]
    IndexTooLarge(String),

    #[error("oracle query at index {index} beyond query depth {depth}")]
    QueryBeyondDepth { index: u64, depth: usize },

    #[error("depth violation: need {needed}, table depth {depth}")]
    DepthViolation { needed: usize, depth: usize },

    #[error("martingale fairness fails at {sigma}")]
    Unfair { sigma: String },

    #[error("negative martingale value at {sigma}")]
    NegativeValue { sigma: String },

    #[error("no stage within ceiling {ceiling}")]
    NoStageWithinBudget { ceiling: u64 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("budget inconclusive: {0}")]
    BudgetInconclusive(String),

    #[error("no fixed point among the first {searched} indices")]
    NoFixedPoint { searched: u64 },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
