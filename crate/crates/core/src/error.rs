use thiserror::Error;

#[derive(Debug, Error)]
pub enum KinError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("non-finite value {value} at index {index}")]
    NonFinite { index: usize, value: f64 },

    #[error("sigma must lie in (0, 1), got {0}")]
    InvalidSigma(f64),

    #[error("invalid noise model: {0}")]
    InvalidNoise(String),

    #[error("invalid flux model: {0}")]
    InvalidFlux(String),

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("path blew up at step {step} (seed {seed}): {detail}")]
    PathBlowup {
        step: usize,
        seed: u64,
        detail: String,
    },

    #[error("incompatible grids: {0}")]
    Incompatible(String),

    #[error("invalid test function: {0}")]
    InvalidTestFunction(String),

    #[error("{0}")]
    Invalid(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, KinError>;
