use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("field contains non-finite values ({count} of {total} samples)")]
    NonFinite { count: usize, total: usize },

    #[error("inadmissible model parameters: {0}")]
    Params(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid grid: {0}")]
    Grid(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("quadrature gate failed: {0}")]
    QuadratureGate(String),

    #[error("ground-state iteration diverged after {iterations} iterations (stabilizer {stabilizer:e})")]
    Divergence { iterations: usize, stabilizer: f64, trace: Vec<f64> },

    #[error(
        "ground-state iteration did not converge in {iterations} iterations (change {change:e}, residual {residual:e})"
    )]
    NoConvergence { iterations: usize, change: f64, residual: f64 },

    #[error("symmetry violation {deviation:e} exceeds tolerance {tolerance:e}")]
    Symmetry { deviation: f64, tolerance: f64 },

    #[error("non-uniform sampling: {0}")]
    Sampling(String),
}

pub type Result<T> = std::result::Result<T, Error>;
