use thiserror::Error;

/// Errors surfaced by the lab. Variants map onto the CLI exit codes:
/// configuration problems exit with 2, everything else with 1.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("construction error: {0}")]
    Construction(String),

    /// A documented precondition of a bound or builder does not hold.
    #[error("refused: {0}")]
    Refusal(String),

    /// Training diverged; the loss trace up to the failure is kept.
    #[error("training diverged at step {step} (loss {loss:e})")]
    Training { step: usize, loss: f64, trace: Vec<f64> },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),
}

impl LabError {
    pub fn is_config(&self) -> bool {
        matches!(self, LabError::Config(_))
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
