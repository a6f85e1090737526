use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid hypergraph: {0}")]
    InvalidHypergraph(String),
    #[error("invalid tensor: {0}")]
    InvalidTensor(String),
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unsupported tensor order {order}: {reason}")]
    UnsupportedOrder { order: usize, reason: &'static str },
    #[error("index overflow: n={n}, k={k} does not fit the platform index type")]
    IndexOverflow { n: usize, k: usize },
    #[error("residual {residual:e} exceeds {limit:e}; input is not a solution")]
    ResidualTooLarge { residual: f64, limit: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("degenerate: {0}")]
    Degenerate(String),
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
