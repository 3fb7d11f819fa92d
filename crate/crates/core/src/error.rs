use thiserror::Error;

/// Errors raised by grid construction, solves and certification pipelines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid weight: {0}")]
    InvalidWeight(String),
    #[error("expression error at position {pos}: {msg}")]
    Expression { pos: usize, msg: String },
    #[error("invalid nonlinearity: {0}")]
    InvalidNonlinearity(String),
    #[error("linear solver: {0}")]
    Solver(String),
    #[error("eigen solver: {0}")]
    Eigen(String),
    #[error("bracket violation at node {node}: {msg}")]
    Bracket { node: usize, msg: String },
    #[error("verification failed at node {node}: {msg} (excess {excess:.3e})")]
    Verification { node: usize, msg: String, excess: f64 },
    #[error("iteration did not converge: {0}")]
    NotConverged(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
