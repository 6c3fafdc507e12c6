use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("negative time {0}")]
    NegativeTime(f64),

    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("component {component} out of range ({components} components)")]
    ComponentOutOfRange { component: usize, components: usize },

    #[error("insufficient oversampling: need at least {required} points per axis, have {actual}")]
    InsufficientOversampling { required: usize, actual: usize },

    #[error("field is not real: reality defect {defect:e}")]
    NotReal { defect: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown preset `{0}`")]
    UnknownPreset(String),

    #[error("no asymmetry witness: every B_i is symmetric")]
    NoWitness,

    #[error("snapshot format: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
