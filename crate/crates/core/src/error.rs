use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("non-finite samples at z = {z:.6e} (step {step})")]
    NonFinite { z: f64, step: usize },

    #[error("step too coarse: {phase:.3} rad per step exceeds pi (step {step}); increase n_steps")]
    StepResolution { phase: f64, step: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("measurement failed: {0}")]
    Measurement(String),

    #[error("snapshot format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}
