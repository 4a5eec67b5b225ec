use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("contract violated: {0}")]
    Contract(String),
    #[error("structural check failed: {0}")]
    Structural(String),
    #[error("almost Hermitian structure is outside class G1: Nijenhuis skew residual {0:e}")]
    OutsideG1(f64),
    #[error("holonomy closure did not stabilise after {0} rounds (dimension {1})")]
    NonConvergence(usize, usize),
    #[error("point {0:?} is closer than two steps to the chart boundary")]
    Domain(Vec<f64>),
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
