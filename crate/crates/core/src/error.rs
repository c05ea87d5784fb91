use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("grid size {0} must be a power of two and at least 16")]
    GridSize(usize),
    #[error("physical side must be positive and finite, got {0}")]
    Side(f64),
    #[error("operation not supported on a {0} domain")]
    UnsupportedKind(&'static str),
    #[error("gamma = {0} lies outside [0, 2)")]
    Gamma(f64),
    #[error("radius {radius} is below the resolution floor {floor}")]
    UnderResolved { radius: f64, floor: f64 },
    #[error("point ({0}, {1}) lies outside the domain")]
    OutsideDomain(f64, f64),
    #[error("vertex ({0}, {1}) lies outside the grid")]
    VertexOutside(usize, usize),
    #[error("grid mismatch: expected {expected} values, got {got}")]
    GridMismatch { expected: usize, got: usize },
    #[error("mode count {requested} exceeds the {available} available modes")]
    ModeCount { requested: usize, available: usize },
    #[error("threshold must be positive, got {0}")]
    Threshold(f64),
    #[error("test set is empty")]
    EmptySet,
    #[error("invalid parameter `{name}`: {value}")]
    Parameter { name: &'static str, value: f64 },
    #[error("need at least {needed} usable scales, got {got}")]
    TooFewScales { needed: usize, got: usize },
    #[error("linear solve failed: {0}")]
    Solver(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
