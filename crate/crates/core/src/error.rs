use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field contains a non-finite value at cell ({i}, {j})")]
    NonFiniteField { i: usize, j: usize },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid potential: {0}")]
    InvalidPotential(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),
}

pub type Result<T> = std::result::Result<T, Error>;
