use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DyadicError {
    #[error("scale parameter lambda = {0} is outside the open interval (1/2, 1)")]
    ScaleOutOfRange(String),
    #[error("atom on {atom} is finer than the grid resolution 2^{resolution} in coordinate {coord}")]
    ResolutionTooCoarse {
        atom: String,
        resolution: i32,
        coord: usize,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("coordinate {coord} out of range for dimension {dim}")]
    CoordinateOutOfRange { coord: usize, dim: usize },
    #[error("pairing has no finite closed form: {0}")]
    Divergent(String),
    #[error("symbol must be a finite Haar combination: {0}")]
    NotHaarFinite(String),
    #[error("operator only defined in dimension {required}, got {got}")]
    UnsupportedDimension { required: usize, got: usize },
    #[error("invalid tensor paraproduct spec: {0}")]
    InvalidTensorSpec(String),
    #[error("window/resolution mismatch: {0}")]
    InvalidGrid(String),
    #[error("exponents violate 1 - sum(alpha) + 1/q = 1/p (residual {0:e})")]
    ScalingRelationViolated(f64),
    #[error("empty corpus")]
    EmptyCorpus,
}

pub type Result<T, E = DyadicError> = std::result::Result<T, E>;
