use thiserror::Error;

/// Errors raised by the numerical kernels, manifold constructors and integrators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch in {op}: expected {expected}, found {found}")]
    DimensionMismatch {
        op: &'static str,
        expected: String,
        found: String,
    },
    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),
    #[error("matrix is not positive definite: smallest eigenvalue {min_eigenvalue:e} <= threshold {threshold:e}")]
    NotPositiveDefinite { min_eigenvalue: f64, threshold: f64 },
    #[error("eigenvalue {eigenvalue:e} below the PSD clamp threshold {threshold:e}")]
    NegativeEigenvalue { eigenvalue: f64, threshold: f64 },
    #[error("columns are not orthonormal (residual {residual:e})")]
    NotOrthonormal { residual: f64 },
    #[error("vector is not tangent (residual {residual:e})")]
    NotTangent { residual: f64 },
    #[error("subspaces differ (residual {residual:e})")]
    SpanMismatch { residual: f64 },
    #[error("expected rank {expected}, numerical rank is {found}")]
    RankMismatch { expected: usize, found: usize },
    #[error("matrix is rank deficient: smallest singular value {sigma_min:e} <= {threshold:e}")]
    RankDeficient { sigma_min: f64, threshold: f64 },
    #[error("D lost positivity at t = {time} (smallest eigenvalue {min_eigenvalue:e})")]
    Breakdown { time: f64, min_eigenvalue: f64 },
    #[error("t = {t} outside the geodesic domain; admissible t < {t_max}")]
    DomainExceeded { t: f64, t_max: f64 },
    #[error("horizontal velocity is zero; use the vertical geodesic")]
    ZeroHorizontalVelocity,
    #[error("horizontal lift residual {residual:e} above tolerance")]
    LiftResidual { residual: f64 },
    #[error("logarithm rotation certificate failed (residual {residual:e})")]
    CertificateFailure { residual: f64 },
    #[error("rank of X^T Y is {svd_rank} but {angle_count} principal angles are orthogonal (expected {expected})")]
    CountMismatch {
        svd_rank: usize,
        angle_count: usize,
        expected: usize,
    },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_mismatch(op: &'static str, expected: impl std::fmt::Display, found: impl std::fmt::Display) -> Error {
    Error::DimensionMismatch {
        op,
        expected: expected.to_string(),
        found: found.to_string(),
    }
}
