use thiserror::Error;

/// Errors raised anywhere in the simulator, trainer or action oracles.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("points are not strictly increasing along the axis: {0}")]
    NonMonotonicBarriers(String),
    #[error("barrier {0} has no slits")]
    EmptyBarrier(usize),
    #[error("barrier {barrier} has duplicate slit position {position}")]
    DuplicateSlit { barrier: usize, position: f64 },
    #[error("wavelength must be positive, got {0}")]
    NonPositiveWavelength(f64),
    #[error("non-finite coordinate in {0}")]
    NonFiniteCoordinate(String),
    #[error("path count {count} exceeds cap {cap}")]
    PathExplosion { count: u128, cap: u64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("refraction index {index} at region {region} must be positive and finite")]
    NonPositiveIndex { region: usize, index: f64 },
    #[error("cannot sum an empty path set")]
    EmptyPathSet,

    #[error("boolean evaluation requires a threshold activation")]
    WrongActivation,
    #[error("boolean input must be 0 or 1, got {0}")]
    NonBinaryInput(f64),
    #[error("inconsistent network shape: {0}")]
    NetworkShape(String),

    #[error("dataset is empty")]
    EmptyDataset,
    #[error("bad dataset range: {0}")]
    BadRange(String),
    #[error("segment length {0:e} is degenerate")]
    DegenerateSegment(f64),
    #[error("loss became non-finite at epoch {0}")]
    NonFiniteLoss(usize),
    #[error("invalid training configuration: {0}")]
    BadTrainConfig(String),

    #[error("potential puts the particle in an evanescent region (n^2 = {0})")]
    EvanescentRegion(f64),
    #[error("radius {r} is inside the critical radius {critical}")]
    InsideCriticalRadius { r: f64, critical: f64 },
    #[error("bad radii: {0}")]
    BadRadii(String),
    #[error("radius {r} is at or below the horizon {horizon}")]
    BelowHorizon { r: f64, horizon: f64 },
    #[error("velocity radicand went negative at r = {0}")]
    TurningPointCrossed(f64),
    #[error("direction must be -1 or +1, got {0}")]
    InvalidDirection(i32),
    #[error("integrand is not finite at t = {0}")]
    NonFiniteIntegrand(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
