use thiserror::Error;

pub type Result<T> = std::result::Result<T, EpsdError>;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum EpsdError {
    #[error("non-finite sample at index {index}")]
    NonFiniteSample { index: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("degenerate window: {0}")]
    DegenerateWindow(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("divergent integral: {0}")]
    Divergent(String),

    #[error("spec mismatch: {0}")]
    SpecMismatch(String),

    #[error("model error: {0}")]
    Model(String),

    #[error("numerical defect: {0}")]
    Defect(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl EpsdError {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        EpsdError::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
