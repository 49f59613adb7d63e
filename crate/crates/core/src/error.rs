//! Error type shared across the library.

use thiserror::Error;

/// Library-wide result alias.
pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong while building grids, generating paths,
/// evaluating bounds, or running a verification suite.
#[derive(Debug, Error)]
pub enum Error {
    #[error("Hurst exponent must satisfy 0 < H < 1, got {0}")]
    InvalidHurst(f64),
    #[error("time grid needs horizon > 0 and steps >= 1, got horizon={horizon}, steps={steps}")]
    InvalidGrid { horizon: f64, steps: usize },
    #[error("grid of {steps} steps exceeds the dense-factorisation cap of {cap}")]
    GridTooLarge { steps: usize, cap: usize },
    #[error("time arguments must be non-negative, got {0}")]
    NegativeTime(f64),
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
    #[error("{name} must lie strictly inside (0, 1), got {value}")]
    NotAProbability { name: &'static str, value: f64 },
    #[error(
        "increment covariance matrix is not positive definite at pivot {pivot} (value {value:e})"
    )]
    NotPositiveDefinite { pivot: usize, value: f64 },
    #[error(
        "circulant embedding is not nonnegative definite: eigenvalue {value:e} at index {index} \
         falls below the clamping tolerance -{tolerance:e}"
    )]
    EmbeddingNotNonnegativeDefinite {
        index: usize,
        value: f64,
        tolerance: f64,
    },
    #[error("expected {expected} increments for this grid, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("path values must start at 0, got {0}")]
    PathNotAnchored(f64),
    #[error("this quantity is only defined for persistent paths (H > 1/2), got H = {0}")]
    RequiresPersistence(f64),
    #[error("this suite is a Brownian cross-check and requires H = 1/2 exactly, got H = {0}")]
    RequiresBrownian(f64),
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("estimable range is empty: no sample mass at or above {lower}")]
    EstimableRangeEmpty { lower: f64 },
    #[error("censor horizon {censor} must be at least the simulation horizon {horizon}")]
    CensorBelowHorizon { censor: f64, horizon: f64 },
    #[error("quadrature failed to reach relative tolerance {rel_tol:e}")]
    QuadratureDidNotConverge { rel_tol: f64 },
    #[error("unknown suite '{0}'; valid suites: {1}")]
    UnknownSuite(String, &'static str),
    #[error("{name} mismatch between model and path: expected {expected}, got {got}")]
    ModelMismatch {
        name: &'static str,
        expected: f64,
        got: f64,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
