use thiserror::Error;

use crate::forms::FalloffReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("degree mismatch: expected {expected}, got {actual}")]
    DegreeMismatch { expected: usize, actual: usize },

    #[error("invalid index tuple {indices:?} for dimension {dim}: {reason}")]
    InvalidIndex {
        indices: Vec<usize>,
        dim: usize,
        reason: &'static str,
    },

    #[error("chart dimension must be at least 3, got {0}")]
    InvalidDimension(usize),

    #[error("form degree p = {p} outside 1..={max} for D = {dim}")]
    InvalidFormDegree { p: usize, dim: usize, max: usize },

    #[error("radius must be positive, got {0}")]
    NonPositiveRadius(f64),

    #[error("non-integrable singularity at angle {angle}: sin^{sin_exp} cos^{cos_exp}")]
    NonIntegrable {
        angle: usize,
        sin_exp: i32,
        cos_exp: i32,
    },

    #[error("product creates (ln r)^2, which exceeds the supported log power")]
    LogOverflow,

    #[error("invalid gauge parameter: {0}")]
    GaugeParameter(String),

    #[error("field violates the fall-off template")]
    Falloff(FalloffReport),

    #[error("current is not closed (max residual coefficient {0:e})")]
    NotClosed(f64),

    #[error("ratio undefined: denominator charge vanishes")]
    ZeroDenominator,

    #[error("invalid cycle: {0}")]
    InvalidCycle(String),

    #[error("empty integration grid")]
    EmptyGrid,

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
