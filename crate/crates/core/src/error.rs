use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mode count {m} outside supported range 1..={max}")]
    ModeRange { m: usize, max: usize },

    #[error("dimension guard: {0}")]
    DimensionGuard(String),

    #[error("index {index} out of range 1..={max}")]
    IndexRange { index: usize, max: usize },

    #[error("indices must be strictly increasing: {0:?}")]
    Unordered(Vec<usize>),

    #[error("operator is not even: ||X - PXP||_max = {deviation:e}")]
    NotEven { deviation: f64 },

    #[error("operator is not Hermitian: ||X - X^dag||_max = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("operator trace is {trace}, expected 1")]
    Normalization { trace: f64 },

    #[error("operator is not positive semidefinite: min eigenvalue {min_eigenvalue:e}")]
    NotPsd { min_eigenvalue: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid state file: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
