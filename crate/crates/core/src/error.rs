use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right} ambient coordinates")]
    DimensionMismatch { left: usize, right: usize },

    #[error("point is not on the unit sphere (norm {norm})")]
    NotUnit { norm: f64 },

    #[error("a sphere point needs at least 2 finite ambient coordinates")]
    DegenerateCoordinates,

    #[error("antipodal points have no unique geodesic")]
    Antipodal,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("point lies outside the domain cap (distance {distance} > radius {radius})")]
    OutOfDomain { distance: f64, radius: f64 },

    #[error("iterate escaped the domain cap at step {step}")]
    EscapedDomain { step: usize },

    #[error("point is not a fixed point (displacement {displacement})")]
    NotFixedPoint { displacement: f64 },

    #[error("solver did not converge after {iterations} iterations (residual {residual})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("unsupported functional: {0}")]
    Unsupported(String),

    #[error("empty input: {0}")]
    Empty(&'static str),
}
