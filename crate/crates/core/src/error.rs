use thiserror::Error;

/// Errors raised by the model, scheduler, and simulation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("network size must be at least 1, got {0}")]
    InvalidNetworkSize(usize),

    #[error("invalid loop ({left}, {right}) in a network of size {n}")]
    InvalidLoop { left: usize, right: usize, n: usize },

    #[error("distance {d} out of range 1..={n}")]
    DistanceOutOfRange { d: usize, n: usize },

    #[error("exhaustive search refused: n = {n} exceeds budget of {max}")]
    SearchBudgetExceeded { n: usize, max: usize },

    #[error("invalid noise parameters: {0}")]
    InvalidParams(String),

    #[error("loop resistance must be positive, got {0}")]
    NonPositiveResistance(f64),

    #[error("resistance estimation failed: {0}")]
    EstimationFailed(&'static str),

    #[error("round contains overlapping loops {a:?} and {b:?}")]
    OverlappingRound { a: (usize, usize), b: (usize, usize) },

    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
