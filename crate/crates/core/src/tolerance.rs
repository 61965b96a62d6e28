//! Numerical thresholds shared across modules.

/// Relative threshold on singular values / eigenvalues deciding numerical rank.
pub const RANK_TOL: f64 = 1e-10;
/// Threshold on a principal-angle cosine below which the angle counts as orthogonal.
pub const ANGLE_TOL: f64 = 1e-8;
/// Relative clamp for negative eigenvalues in PSD square roots.
pub const PSD_CLAMP: f64 = 1e-10;

/// Overridable thresholds for rank decisions and principal-angle classification.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rank_tol: f64,
    pub angle_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rank_tol: RANK_TOL,
            angle_tol: ANGLE_TOL,
        }
    }
}
