use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid construction: {0}")]
    Construction(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("{} sample point(s) rejected, first: #{}: {}", .0.len(), .0[0].0, .0[0].1)]
    RejectedSamples(Vec<(usize, String)>),

    #[error("inner solver exhausted {iters} iterations (best value {best}, residual bound {residual:e})")]
    SolverBudget { iters: usize, best: f64, residual: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("sampling budget exhausted: {0}")]
    Sampling(String),

    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
