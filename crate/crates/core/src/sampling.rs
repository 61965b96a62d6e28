//! Random inputs for property checks, benches and the verify suite.

use rand::Rng;

use crate::geodesics::GeodesicState;
use crate::manifolds::{BundlePoint, BundleTangent, Frame};
use crate::matkernels::{gaussian_matrix, random_orthogonal, DetSign, Mat, SpdMatrix, SymMatrix};

pub fn random_frame(n: usize, k: usize, rng: &mut impl Rng) -> Frame {
    Frame::from_full(&random_orthogonal(n, rng.random(), DetSign::Plus), k).expect("orthogonal")
}

pub fn random_sym(k: usize, scale: f64, rng: &mut impl Rng) -> SymMatrix {
    SymMatrix::new(gaussian_matrix(k, k, rng) * scale).expect("finite")
}

/// `I + AAᵀ/2` with Gaussian `A`: eigenvalues in `[1, ∞)`, moderate condition number.
pub fn random_spd(k: usize, rng: &mut impl Rng) -> SpdMatrix {
    let a = gaussian_matrix(k, k, rng);
    SpdMatrix::new(&a * a.transpose() * 0.5 + Mat::identity(k, k)).expect("positive")
}

pub fn random_point(n: usize, k: usize, rng: &mut impl Rng) -> BundlePoint {
    let frame = random_frame(n, k, rng);
    BundlePoint::new(frame, random_spd(k, rng)).expect("consistent")
}

pub fn random_tangent(n: usize, k: usize, rng: &mut impl Rng) -> BundleTangent {
    let b = gaussian_matrix(n - k, k, rng);
    BundleTangent::new(b, random_sym(k, 1.0, rng)).expect("consistent")
}

/// Initial data with `B` of size about 0.3 and `S` about 0.2, small enough that `D` stays
/// positive definite on `[0, 1]` for all practical draws.
pub fn random_state(n: usize, k: usize, rng: &mut impl Rng) -> GeodesicState {
    let frame = random_frame(n, k, rng);
    let d = random_spd(k, rng);
    let b = gaussian_matrix(n - k, k, rng) * 0.3;
    let s = random_sym(k, 0.2, rng);
    GeodesicState::new(&frame, &d, b, &s).expect("consistent")
}

/// Vertical initial data (`B = 0`).
pub fn random_vertical_state(n: usize, k: usize, rng: &mut impl Rng) -> GeodesicState {
    let mut s = random_state(n, k, rng);
    s.b.fill(0.0);
    s
}

/// Diagonal `D₀, S₀` and `B₀` supported on its leading diagonal. The flow keeps
/// this pattern, so `[D, S] = 0` for all t.
pub fn random_commuting_state(n: usize, k: usize, rng: &mut impl Rng) -> GeodesicState {
    let frame = random_frame(n, k, rng);
    let dvals: Vec<f64> = (0..k).map(|_| rng.random_range(0.5..2.0)).collect();
    let svals: Vec<f64> = (0..k).map(|_| rng.random_range(-0.3..0.3)).collect();
    let mut b = Mat::zeros(n - k, k);
    for i in 0..k.min(n - k) {
        b[(i, i)] = rng.random_range(-0.5..0.5);
    }
    GeodesicState::new(
        &frame,
        &SpdMatrix::from_diagonal(&dvals).expect("positive"),
        b,
        &SymMatrix::from_diagonal(&svals),
    )
    .expect("consistent")
}

/// `n×k` Gaussian factor; full column rank with probability one.
pub fn random_factor(n: usize, k: usize, rng: &mut impl Rng) -> Mat {
    gaussian_matrix(n, k, rng)
}
