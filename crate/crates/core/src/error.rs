use thiserror::Error;

/// Errors produced anywhere in the inference pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty sample")]
    EmptySample,

    #[error("performance matrix: {0}")]
    InvalidMatrix(String),

    #[error("non-dominated matrix not found after {rounds} rejection rounds")]
    RejectionCapExceeded { rounds: usize },

    #[error("linear program is infeasible")]
    Infeasible,

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("numerical failure in LP solver: {0}")]
    Numerical(String),

    #[error("preference statements are incompatible (epsilon* = {epsilon_star:e})")]
    Incompatible { epsilon_star: f64 },

    #[error("polytope is degenerate (Chebyshev radius {radius:e})")]
    DegeneratePolytope { radius: f64 },

    #[error("reference model `{0}` must be resolved by the parametric optimizer")]
    UnresolvedReference(String),

    #[error("invalid lambda {lambda} for {kind} distribution")]
    InvalidLambda { kind: &'static str, lambda: f64 },

    #[error("logistic fit did not converge in {iterations} iterations (gradient norm {grad_norm:e})")]
    NonConvergence { iterations: usize, grad_norm: f64 },

    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
