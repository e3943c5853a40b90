use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported dimension: expected {expected}, got {got}")]
    UnsupportedDimension { expected: String, got: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("task undefined: {0}")]
    TaskUndefined(String),

    #[error("generation failed after {attempts} attempts: {reason}")]
    GenerationFailure { attempts: usize, reason: String },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("degenerate training problem: {0}")]
    DegenerateTraining(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),
}

impl Error {
    /// True for errors caused by the configuration rather than by the
    /// numerics of a particular realization.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig(_) | Error::TaskUndefined(_) | Error::InvalidInput(_)
        )
    }
}
