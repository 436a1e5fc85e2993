use thiserror::Error;

/// Errors raised by the field kit, the solvers and the experiment layer.
#[derive(Debug, Error)]
pub enum Error {
    #[error("poisoned field: non-finite value at (j={j}, i={i})")]
    PoisonedField { j: usize, i: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("unresolved: {0}")]
    Resolution(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("step size: {0}")]
    StepSize(String),

    #[error("blow-up: {0}")]
    BlowUp(String),

    #[error("missing data: {0}")]
    Data(String),

    #[error("misaligned trajectories: {0}")]
    Alignment(String),

    #[error("fit: {0}")]
    Fit(String),

    #[error("format: {0}")]
    Format(String),

    #[error("plan: {0}")]
    Plan(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
