use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid lottery: {0}")]
    InvalidLottery(String),

    #[error("dimension mismatch: expected {expected_agents}x{expected_objects}, got {agents}x{objects}")]
    DimensionMismatch {
        expected_agents: usize,
        expected_objects: usize,
        agents: usize,
        objects: usize,
    },

    #[error("enumeration budget exceeded (limit {0})")]
    EnumerationBudgetExceeded(usize),

    #[error("assumption {number} fails: {detail}")]
    AssumptionViolated { number: u8, detail: String },

    #[error("the zero assignment is infeasible")]
    InfeasibleStart,

    #[error("feasible set is not downward closed: {0}")]
    NotDownwardClosed(String),

    #[error("priority list violates consecutive equals: {0}")]
    NotConsecutiveEquals(String),

    #[error("invalid priority list: {0}")]
    InvalidPriorityList(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("parse error at {path}: {message}")]
    Parse { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn parse(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
