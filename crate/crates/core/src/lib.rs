//! Fixed-rank covariance matrices as the associated bundle
//! `St(n,k) ×_{O(k)} Sym⁺(k)` under the Bures–Wasserstein metric.
//!
//! * [`matkernels`]: Sylvester solves, symmetric eigendecomposition, PSD roots, thin SVD.
//! * [`manifolds`]: Stiefel/Grassmann/bundle points, tangent splittings, principal angles.
//! * [`bwgeom`]: `φ`, `dφ`, both metrics, BW distances.
//! * [`geodesics`]: the geodesic ODE, closed forms and the quotient-line oracle.
//! * [`logmaps`]: logarithm index sets and certified rotations.
//! * [`batch`]: data-parallel evaluation over many trajectories or trials.
//! * [`presets`]: initial data and closed forms of the worked examples.
//! * [`verify`]: the randomized invariant suite.

pub mod batch;
pub mod bwgeom;
pub mod error;
pub mod geodesics;
pub mod logmaps;
pub mod manifolds;
pub mod matkernels;
pub mod presets;
pub mod sampling;
pub mod tolerance;
pub mod verify;

pub use error::{Error, Result};
pub use matkernels::Mat;

#[cfg(test)]
mod proptests;
