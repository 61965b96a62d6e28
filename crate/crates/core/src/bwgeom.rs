//! The diffeomorphism `φ([Q, D]) = QDQᵀ` onto the rank-k stratum, its
//! differential, the Bures–Wasserstein metric on both sides, and BW distances.

use crate::error::{dim_mismatch, Error, Result};
use crate::manifolds::{BundlePoint, BundleTangent, Frame, StiefelPoint};
use crate::matkernels::{fro, psd_sqrt, sylvester_solve, sym_eig, symmetrize, thin_svd, Mat, SpdMatrix, SymMatrix};
use crate::tolerance::RANK_TOL;

const TANGENT_TOL: f64 = 1e-8;

/// A PSD matrix of exact rank k with its factor `Σ = QDQᵀ`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsdFixedRank {
    sigma: Mat,
    q: StiefelPoint,
    d: SpdMatrix,
}

impl PsdFixedRank {
    /// Factor `sigma` through its top-k eigenpairs, rejecting any other numerical rank.
    pub fn from_sigma(sigma: &Mat, k: usize) -> Result<Self> {
        Self::from_sigma_with_tol(sigma, k, RANK_TOL)
    }

    pub fn from_sigma_with_tol(sigma: &Mat, k: usize, rank_tol: f64) -> Result<Self> {
        let sym = SymMatrix::new(sigma.clone())?;
        let n = sym.dim();
        if k == 0 || k > n {
            return Err(Error::InvalidArgument(format!("rank k = {k} with n = {n}")));
        }
        let eig = sym_eig(&sym)?;
        let lmax = eig.values[n - 1];
        let threshold = rank_tol * lmax.max(0.0);
        if eig.values[0] < -threshold {
            return Err(Error::NegativeEigenvalue {
                eigenvalue: eig.values[0],
                threshold: -threshold,
            });
        }
        let rank = eig.values.iter().filter(|&&l| l > threshold).count();
        if rank != k {
            return Err(Error::RankMismatch {
                expected: k,
                found: rank,
            });
        }
        // top-k, descending
        let idx: Vec<usize> = (n - k..n).rev().collect();
        let q = Mat::from_fn(n, k, |r, c| eig.vectors[(r, idx[c])]);
        let dvals: Vec<f64> = idx.iter().map(|&i| eig.values[i]).collect();
        let d = SpdMatrix::from_diagonal(&dvals)?;
        Ok(Self {
            sigma: sym.into_mat(),
            q: StiefelPoint::new(q)?,
            d,
        })
    }

    /// Numerical rank of a PSD matrix under `rank_tol · λ_max`.
    pub fn numerical_rank(sigma: &Mat, rank_tol: f64) -> Result<usize> {
        let eig = sym_eig(&SymMatrix::new(sigma.clone())?)?;
        let lmax = eig.values.iter().copied().fold(0.0, f64::max);
        Ok(eig.values.iter().filter(|&&l| l > rank_tol * lmax).count())
    }

    pub fn n(&self) -> usize {
        self.sigma.nrows()
    }

    pub fn k(&self) -> usize {
        self.d.dim()
    }

    pub fn sigma(&self) -> &Mat {
        &self.sigma
    }

    pub fn q(&self) -> &StiefelPoint {
        &self.q
    }

    pub fn d(&self) -> &SpdMatrix {
        &self.d
    }

    /// `P⊥ = I − QQᵀ`, the projector onto the nullspace.
    pub fn null_projector(&self) -> Mat {
        let q = self.q.as_mat();
        let n = self.n();
        Mat::identity(n, n) - q * q.transpose()
    }

    /// `Σ† = QD⁻¹Qᵀ`
    pub fn pseudo_inverse(&self) -> Mat {
        let q = self.q.as_mat();
        symmetrize(&(q * self.d.inverse() * q.transpose()))
    }

    /// `Σ = QDQᵀ` from a given factor.
    pub fn from_factor(q: StiefelPoint, d: SpdMatrix) -> Result<Self> {
        if q.k() != d.dim() {
            return Err(dim_mismatch("PsdFixedRank::from_factor", q.k(), d.dim()));
        }
        let qm = q.as_mat();
        let sigma = symmetrize(&(qm * d.as_mat() * qm.transpose()));
        Ok(Self { sigma, q, d })
    }

    /// `Σ = XXᵀ` for full column rank `X`, factored through the SVD of `X`.
    pub fn from_full_rank_factor(x: &Mat) -> Result<Self> {
        let svd = thin_svd(x)?;
        let k = svd.sigma.len();
        let threshold = RANK_TOL * svd.sigma.get(0).copied().unwrap_or(0.0);
        if k == 0 || svd.sigma[k - 1] <= threshold {
            return Err(Error::RankDeficient {
                sigma_min: svd.sigma.get(k.wrapping_sub(1)).copied().unwrap_or(0.0),
                threshold,
            });
        }
        let d: Vec<f64> = svd.sigma.iter().map(|s| s * s).collect();
        let sigma = symmetrize(&(x * x.transpose()));
        Ok(Self {
            sigma,
            q: StiefelPoint::new(svd.u)?,
            d: SpdMatrix::from_diagonal(&d)?,
        })
    }
}

/// A tangent vector `V ∈ T_Σ` (symmetric with `P⊥VP⊥ = 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientTangent(Mat);

impl AmbientTangent {
    /// Symmetrizes `v` and checks the nullspace condition against `at`.
    pub fn new(v: Mat, at: &PsdFixedRank) -> Result<Self> {
        let v = SymMatrix::new(v)?.into_mat();
        check_tangent_with(&v, &at.null_projector())?;
        Ok(Self(v))
    }

    pub fn as_mat(&self) -> &Mat {
        &self.0
    }

    pub fn into_mat(self) -> Mat {
        self.0
    }
}

fn check_tangent_with(v: &Mat, pperp: &Mat) -> Result<()> {
    if v.shape() != pperp.shape() {
        return Err(dim_mismatch(
            "tangent check",
            format!("{}x{}", pperp.nrows(), pperp.ncols()),
            format!("{}x{}", v.nrows(), v.ncols()),
        ));
    }
    let residual = fro(&(pperp * v * pperp));
    if residual > TANGENT_TOL * fro(v).max(1.0) {
        return Err(Error::NotTangent { residual });
    }
    Ok(())
}

/// `φ([Q, D]) = QDQᵀ`
pub fn phi(p: &BundlePoint) -> PsdFixedRank {
    PsdFixedRank {
        sigma: p.sigma(),
        q: p.frame.q().clone(),
        d: p.d.clone(),
    }
}

/// Class representative of `Σ` from its top-k eigenpairs; `D` comes out diagonal.
pub fn phi_inv(s: &PsdFixedRank) -> Result<BundlePoint> {
    let fresh = PsdFixedRank::from_sigma(&s.sigma, s.k())?;
    BundlePoint::new(Frame::complete(fresh.q), fresh.d)
}

/// `dφ(Q⊥B, T) = Q⊥BDQᵀ + QDBᵀQ⊥ᵀ + QTQᵀ`
pub fn dphi(p: &BundlePoint, w: &BundleTangent) -> AmbientTangent {
    let q = p.q();
    let off = p.frame.qperp() * &w.b * p.d.as_mat() * q.transpose();
    let v = &off + off.transpose() + q * w.t.as_mat() * q.transpose();
    AmbientTangent(symmetrize(&v))
}

/// Blockwise inverse of [`dphi`]: `T = QᵀVQ`, `B = Q⊥ᵀVQD⁻¹`.
pub fn dphi_inv(p: &BundlePoint, v: &Mat) -> Result<BundleTangent> {
    let q = p.q();
    let n = p.n();
    let v = SymMatrix::new(v.clone())?.into_mat();
    check_tangent_with(&v, &(Mat::identity(n, n) - q * q.transpose()))?;
    let t = SymMatrix::new(q.transpose() * &v * q)?;
    let b = p.frame.qperp().transpose() * &v * q * p.d.inverse();
    BundleTangent::new(b, t)
}

/// `S_{Σ,V} = Q S_D(QᵀVQ) Qᵀ`
fn sylvester_lift(s: &PsdFixedRank, v: &Mat) -> Result<Mat> {
    let q = s.q.as_mat();
    let inner = sylvester_solve(&s.d, &SymMatrix::new(q.transpose() * v * q)?)?;
    Ok(q * inner.as_mat() * q.transpose())
}

/// The BW metric on `T_Σ`: `Tr(S_{Σ,V} Σ S_{Σ,W}) + Tr(P⊥ V Σ† W)`.
pub fn ambient_metric(s: &PsdFixedRank, v: &AmbientTangent, w: &AmbientTangent) -> Result<f64> {
    let pperp = s.null_projector();
    check_tangent_with(&v.0, &pperp)?;
    check_tangent_with(&w.0, &pperp)?;
    let sv = sylvester_lift(s, &v.0)?;
    let sw = sylvester_lift(s, &w.0)?;
    let vertical = (sv * &s.sigma * sw).trace();
    let horizontal = (pperp * &v.0 * s.pseudo_inverse() * &w.0).trace();
    Ok(vertical + horizontal)
}

/// Pullback metric `h = Tr(B₁DB₂ᵀ) + Tr(S_D(T₁) D S_D(T₂))`.
pub fn bundle_metric(p: &BundlePoint, w1: &BundleTangent, w2: &BundleTangent) -> Result<f64> {
    let d = p.d.as_mat();
    let horizontal = (&w1.b * d * w2.b.transpose()).trace();
    let s1 = sylvester_solve(&p.d, &w1.t)?;
    let s2 = sylvester_solve(&p.d, &w2.t)?;
    let vertical = (s1.as_mat() * d * s2.as_mat()).trace();
    Ok(horizontal + vertical)
}

/// Bures–Wasserstein distance between PSD matrices of any rank.
pub fn bw_distance(a: &Mat, b: &Mat) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(dim_mismatch(
            "bw_distance",
            format!("{}x{}", a.nrows(), a.ncols()),
            format!("{}x{}", b.nrows(), b.ncols()),
        ));
    }
    let a = SymMatrix::new(a.clone())?;
    let b = SymMatrix::new(b.clone())?;
    // psd_sqrt rejects non-PSD input
    let ra = psd_sqrt(&a)?;
    psd_sqrt(&b)?;
    let inner = SymMatrix::new(ra.as_mat() * b.as_mat() * ra.as_mat())?;
    let cross = psd_sqrt(&inner)?.as_mat().trace();
    let d2 = a.as_mat().trace() + b.as_mat().trace() - 2.0 * cross;
    Ok(d2.max(0.0).sqrt())
}

/// Quotient distance `min_{R ∈ O(k)} ‖X − YR‖_F = (‖X‖² + ‖Y‖² − 2‖YᵀX‖_*)^{1/2}`.
pub fn bw_distance_procrustes(x: &Mat, y: &Mat) -> Result<f64> {
    if x.shape() != y.shape() {
        return Err(dim_mismatch(
            "bw_distance_procrustes",
            format!("{}x{}", x.nrows(), x.ncols()),
            format!("{}x{}", y.nrows(), y.ncols()),
        ));
    }
    for m in [x, y] {
        check_full_column_rank(m)?;
    }
    bw_distance_factors(x, y)
}

/// `(‖X‖² + ‖Y‖² − 2‖YᵀX‖_*)^{1/2}` for factors `n×k₁`, `n×k₂` of any rank.
pub fn bw_distance_factors(x: &Mat, y: &Mat) -> Result<f64> {
    if x.nrows() != y.nrows() {
        return Err(dim_mismatch("bw_distance_factors", x.nrows(), y.nrows()));
    }
    let cross = if x.ncols() == 0 || y.ncols() == 0 {
        0.0
    } else if y.ncols() >= x.ncols() {
        thin_svd(&(y.transpose() * x))?.nuclear()
    } else {
        thin_svd(&(x.transpose() * y))?.nuclear()
    };
    let d2 = x.norm_squared() + y.norm_squared() - 2.0 * cross;
    Ok(d2.max(0.0).sqrt())
}

pub(crate) fn check_full_column_rank(m: &Mat) -> Result<()> {
    let svd = thin_svd(m)?;
    let k = svd.sigma.len();
    if k == 0 {
        return Ok(());
    }
    let threshold = RANK_TOL * svd.sigma[0];
    let sigma_min = svd.sigma[k - 1];
    if svd.sigma[0] == 0.0 || sigma_min <= threshold {
        return Err(Error::RankDeficient { sigma_min, threshold });
    }
    Ok(())
}
