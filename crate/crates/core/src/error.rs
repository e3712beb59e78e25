use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid complex: {0}")]
    InvalidComplex(String),

    #[error("complex failed validation with {} violation(s)", .0.len())]
    Violations(Vec<crate::complex::Violation>),

    #[error("invalid vertex id {0}")]
    InvalidVertex(usize),

    #[error("invalid cell id {0}")]
    InvalidCell(usize),

    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("point support {0:?} is not an admissible face of the cone")]
    NotAdmissible(Vec<usize>),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("subdivision level {level} needs {edges} graph edges, budget is {budget}")]
    SubdivisionTooLarge { level: usize, edges: usize, budget: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("constant map: the Rayleigh quotient is only defined for nonconstant maps")]
    ConstantMap,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("random graph generation failed after {0} attempts")]
    RetryBudgetExhausted(usize),

    #[error("config error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
