use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point {0:?} is outside the chart domain")]
    OutsideDomain(Vec<f64>),

    #[error("direction is degenerate: F = {0:e}")]
    ZeroDirection(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("fundamental tensor is not positive definite (min eigenvalue {0:e})")]
    NotPositiveDefinite(f64),

    #[error("singular matrix")]
    Singular,

    #[error("invalid metric declaration: {0}")]
    InvalidMetric(String),

    #[error("invalid vector field declaration: {0}")]
    InvalidField(String),

    #[error("integrator step collapsed to {0:e} without meeting tolerance")]
    StepCollapse(f64),

    #[error("frame index {index} out of range for dimension {dimension}")]
    FrameIndex { index: usize, dimension: usize },

    #[error("path is not a geodesic: {0}")]
    NotGeodesic(String),

    #[error("invalid variation: {0}")]
    InvalidVariation(String),

    #[error("unit ball around {0:?} exits the chart")]
    BallExitsChart(Vec<f64>),

    #[error("sample plan is empty")]
    EmptyPlan,

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),
}
