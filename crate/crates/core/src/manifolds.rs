//! Points and tangent vectors on St(n,k), Gr(k,n) and the associated bundle
//! M(n,k) = St(n,k) ×_{O(k)} Sym⁺(k).
//!
//! A Stiefel tangent `V` at `Q` is stored in frame coordinates `V = QA + Q⊥B`
//! with `A` skew and `B` ∈ Mat(n−k, k). The `B`-block only means something
//! relative to the [`Frame`] that produced it.

use crate::error::{dim_mismatch, Error, Result};
use crate::matkernels::{fro, orthonormality_residual, thin_svd, Mat, SpdMatrix, SymMatrix};

const ORTHO_TOL: f64 = 1e-10;
const TANGENT_TOL: f64 = 1e-8;
const SPAN_TOL: f64 = 1e-8;
const CLASS_TOL: f64 = 1e-9;

/// n×k matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct StiefelPoint(Mat);

impl StiefelPoint {
    pub fn new(q: Mat) -> Result<Self> {
        if q.ncols() > q.nrows() {
            return Err(dim_mismatch(
                "StiefelPoint::new",
                "k <= n",
                format!("{}x{}", q.nrows(), q.ncols()),
            ));
        }
        let residual = orthonormality_residual(&q);
        if !residual.is_finite() || residual > ORTHO_TOL {
            return Err(Error::NotOrthonormal { residual });
        }
        Ok(Self(q))
    }

    /// First `k` standard basis vectors of ℝⁿ.
    pub fn identity(n: usize, k: usize) -> Self {
        Self(Mat::identity(n, k))
    }

    /// Orthonormal basis of the column span of a full-rank `x` (left singular vectors).
    pub fn from_span(x: &Mat) -> Result<Self> {
        let svd = thin_svd(x)?;
        Self::new(svd.u)
    }

    pub(crate) fn new_unchecked(q: Mat) -> Self {
        Self(q)
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn k(&self) -> usize {
        self.0.ncols()
    }

    pub fn as_mat(&self) -> &Mat {
        &self.0
    }

    /// Right action `Q ↦ QG`.
    pub fn act(&self, g: &Mat) -> StiefelPoint {
        StiefelPoint(&self.0 * g)
    }
}

/// `Q` together with an orthonormal completion `Q⊥`.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    q: StiefelPoint,
    qperp: Mat,
}

impl Frame {
    /// Validate a user-supplied completion.
    pub fn new(q: StiefelPoint, qperp: Mat) -> Result<Self> {
        let (n, k) = (q.n(), q.k());
        if qperp.shape() != (n, n - k) {
            return Err(dim_mismatch(
                "Frame::new",
                format!("{}x{}", n, n - k),
                format!("{}x{}", qperp.nrows(), qperp.ncols()),
            ));
        }
        let frame = Self { q, qperp };
        let residual = orthonormality_residual(&frame.full());
        if residual > ORTHO_TOL {
            return Err(Error::NotOrthonormal { residual });
        }
        Ok(frame)
    }

    /// Complete `Q` to an orthonormal basis.
    ///
    /// Greedy Gram–Schmidt over the standard basis: at each step the basis
    /// vector with the largest residual (lowest index on ties) is added, so
    /// every accepted residual has squared norm at least `1/n`.
    pub fn complete(q: StiefelPoint) -> Self {
        let (n, k) = (q.n(), q.k());
        let mut basis: Vec<nalgebra::DVector<f64>> = q.as_mat().column_iter().map(|c| c.into_owned()).collect();
        let mut used = vec![false; n];
        let mut extra = Vec::with_capacity(n - k);
        while basis.len() < n {
            let mut best: Option<(usize, nalgebra::DVector<f64>, f64)> = None;
            for (i, taken) in used.iter().enumerate() {
                if *taken {
                    continue;
                }
                let mut v = nalgebra::DVector::zeros(n);
                v[i] = 1.0;
                // two passes of modified Gram–Schmidt
                for _ in 0..2 {
                    for b in &basis {
                        let c = b.dot(&v);
                        v.axpy(-c, b, 1.0);
                    }
                }
                let norm = v.norm();
                if best.as_ref().is_none_or(|(_, _, bn)| norm > *bn) {
                    best = Some((i, v, norm));
                }
            }
            let (i, v, norm) = best.expect("fewer than n basis vectors");
            used[i] = true;
            let v = v / norm;
            basis.push(v.clone());
            extra.push(v);
        }
        let qperp = if extra.is_empty() {
            Mat::zeros(n, 0)
        } else {
            Mat::from_columns(&extra)
        };
        Self { q, qperp }
    }

    /// `[Q Q⊥] = I_n`.
    pub fn identity(n: usize, k: usize) -> Self {
        let full = Mat::identity(n, n);
        Self {
            q: StiefelPoint(full.columns(0, k).into_owned()),
            qperp: full.columns(k, n - k).into_owned(),
        }
    }

    /// Split an n×n orthogonal matrix into `[Q Q⊥]`.
    pub fn from_full(full: &Mat, k: usize) -> Result<Self> {
        let n = full.nrows();
        if !full.is_square() || k > n {
            return Err(dim_mismatch(
                "Frame::from_full",
                "square n×n, k <= n",
                format!("{}x{}", n, full.ncols()),
            ));
        }
        let q = StiefelPoint::new(full.columns(0, k).into_owned())?;
        Self::new(q, full.columns(k, n - k).into_owned())
    }

    pub(crate) fn from_parts_unchecked(q: Mat, qperp: Mat) -> Self {
        Self {
            q: StiefelPoint(q),
            qperp,
        }
    }

    pub fn q(&self) -> &StiefelPoint {
        &self.q
    }

    pub fn qperp(&self) -> &Mat {
        &self.qperp
    }

    pub fn n(&self) -> usize {
        self.q.n()
    }

    pub fn k(&self) -> usize {
        self.q.k()
    }

    /// `[Q Q⊥]`
    pub fn full(&self) -> Mat {
        let (n, k) = (self.n(), self.k());
        let mut m = Mat::zeros(n, n);
        m.columns_mut(0, k).copy_from(self.q.as_mat());
        m.columns_mut(k, n - k).copy_from(&self.qperp);
        m
    }

    /// Right action on `Q` only; `Q⊥` is left untouched.
    pub fn act(&self, g: &Mat) -> Frame {
        Frame {
            q: self.q.act(g),
            qperp: self.qperp.clone(),
        }
    }
}

/// Frame coordinates `(A, B)` of a Stiefel tangent `V = QA + Q⊥B`.
#[derive(Debug, Clone, PartialEq)]
pub struct StiefelTangent {
    a: Mat,
    pub b: Mat,
}

impl StiefelTangent {
    /// Builds from any square `a`, keeping its skew part.
    pub fn new(a: Mat, b: Mat) -> Self {
        let a = (&a - a.transpose()) * 0.5;
        Self { a, b }
    }

    pub fn a(&self) -> &Mat {
        &self.a
    }

    pub fn to_ambient(&self, frame: &Frame) -> Mat {
        frame.q().as_mat() * &self.a + frame.qperp() * &self.b
    }
}

/// Decompose a tangent `V` at `Q` in the frame `[Q Q⊥]`.
pub fn stiefel_split(frame: &Frame, v: &Mat) -> Result<StiefelTangent> {
    let q = frame.q().as_mat();
    if v.shape() != q.shape() {
        return Err(dim_mismatch(
            "stiefel_split",
            format!("{}x{}", q.nrows(), q.ncols()),
            format!("{}x{}", v.nrows(), v.ncols()),
        ));
    }
    let qtv = q.transpose() * v;
    let residual = fro(&(&qtv + qtv.transpose()));
    if residual > TANGENT_TOL {
        return Err(Error::NotTangent { residual });
    }
    Ok(StiefelTangent::new(qtv, frame.qperp().transpose() * v))
}

/// Differential of `π_G: Q ↦ span(Q)` in the frame basis: the `B`-block.
pub fn grassmann_dpi(frame: &Frame, v: &Mat) -> Result<Mat> {
    stiefel_split(frame, v).map(|t| t.b)
}

/// A k-plane in ℝⁿ, stored as a basis and its orthogonal projector.
#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannPoint {
    basis: StiefelPoint,
    projector: Mat,
}

impl GrassmannPoint {
    pub fn from_basis(basis: StiefelPoint) -> Self {
        let q = basis.as_mat();
        let projector = q * q.transpose();
        Self { basis, projector }
    }

    pub fn basis(&self) -> &StiefelPoint {
        &self.basis
    }

    pub fn projector(&self) -> &Mat {
        &self.projector
    }

    /// Projector agreement within `tol` (Frobenius).
    pub fn same_subspace(&self, other: &GrassmannPoint, tol: f64) -> bool {
        self.projector.shape() == other.projector.shape() && fro(&(&self.projector - &other.projector)) <= tol
    }
}

/// Principal angles between two k-planes.
#[derive(Debug, Clone, PartialEq)]
pub struct PrincipalAngles {
    /// Singular values of `Q₁ᵀQ₂`, descending, clamped to `[0, 1]`.
    pub cosines: Vec<f64>,
    /// Matching angles, ascending in `[0, π/2]`.
    pub angles: Vec<f64>,
}

impl PrincipalAngles {
    /// Angles whose cosine is at most `angle_tol`.
    pub fn orthogonal_count(&self, angle_tol: f64) -> usize {
        self.cosines.iter().filter(|&&c| c <= angle_tol).count()
    }

    /// Angles whose cosine is within `10·angle_tol` of the cutoff on either side.
    pub fn borderline_count(&self, angle_tol: f64) -> usize {
        self.cosines
            .iter()
            .filter(|&&c| c > angle_tol / 10.0 && c <= 10.0 * angle_tol)
            .count()
    }
}

/// Principal angles via cosines (singular values `C` of `Q₁ᵀQ₂ = UCVᵀ`) and
/// sines (column norms of `Q₂V − Q₁UC`), combined with `atan2` so that small
/// angles keep full relative accuracy.
pub fn principal_angles(q1: &StiefelPoint, q2: &StiefelPoint) -> Result<PrincipalAngles> {
    if q1.n() != q2.n() || q1.k() != q2.k() {
        return Err(dim_mismatch(
            "principal_angles",
            format!("{}x{}", q1.n(), q1.k()),
            format!("{}x{}", q2.n(), q2.k()),
        ));
    }
    let (a, b) = (q1.as_mat(), q2.as_mat());
    let svd = thin_svd(&(a.transpose() * b))?;
    let cosines: Vec<f64> = svd.sigma.iter().map(|c| c.clamp(0.0, 1.0)).collect();
    let resid = b * &svd.v - a * &svd.u * Mat::from_diagonal(&svd.sigma);
    let mut angles: Vec<f64> = (0..q1.k())
        .map(|i| resid.column(i).norm().min(1.0).atan2(cosines[i]))
        .collect();
    angles.sort_by(f64::total_cmp);
    Ok(PrincipalAngles { cosines, angles })
}

/// Representative `(Q, Q⊥, D)` of a class `[Q, D]` in M(n,k).
#[derive(Debug, Clone, PartialEq)]
pub struct BundlePoint {
    pub frame: Frame,
    pub d: SpdMatrix,
}

impl BundlePoint {
    pub fn new(frame: Frame, d: SpdMatrix) -> Result<Self> {
        if d.dim() != frame.k() {
            return Err(dim_mismatch("BundlePoint::new", frame.k(), d.dim()));
        }
        Ok(Self { frame, d })
    }

    pub fn n(&self) -> usize {
        self.frame.n()
    }

    pub fn k(&self) -> usize {
        self.frame.k()
    }

    pub fn q(&self) -> &Mat {
        self.frame.q().as_mat()
    }

    /// `QDQᵀ`
    pub fn sigma(&self) -> Mat {
        let q = self.q();
        crate::matkernels::symmetrize(&(q * self.d.as_mat() * q.transpose()))
    }

    /// Class equality through the image `QDQᵀ`.
    pub fn same_class(&self, other: &BundlePoint) -> bool {
        if self.n() != other.n() || self.k() != other.k() {
            return false;
        }
        let (a, b) = (self.sigma(), other.sigma());
        fro(&(&a - &b)) <= CLASS_TOL * fro(&a).max(fro(&b)).max(f64::MIN_POSITIVE)
    }
}

/// Tangent representative `(Q⊥B, T)`: horizontal `B`, vertical symmetric `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleTangent {
    pub b: Mat,
    pub t: SymMatrix,
}

impl BundleTangent {
    pub fn new(b: Mat, t: SymMatrix) -> Result<Self> {
        if b.ncols() != t.dim() {
            return Err(dim_mismatch("BundleTangent::new", t.dim(), b.ncols()));
        }
        Ok(Self { b, t })
    }

    pub fn zeros(n: usize, k: usize) -> Self {
        Self {
            b: Mat::zeros(n - k, k),
            t: SymMatrix::zeros(k),
        }
    }
}

/// Fiber chart `ψ⁻¹([Q, S]) = QᵀQ₀ S Q₀ᵀQ` over the plane `span(Q₀)`.
///
/// Here `(Q, S)` is `P`'s representative; the result does not depend on it.
pub fn fiber_chart(q0: &StiefelPoint, p: &BundlePoint) -> Result<SpdMatrix> {
    if q0.n() != p.n() || q0.k() != p.k() {
        return Err(dim_mismatch(
            "fiber_chart",
            format!("{}x{}", p.n(), p.k()),
            format!("{}x{}", q0.n(), q0.k()),
        ));
    }
    let q0m = q0.as_mat();
    let q = p.q();
    let off_span = q - q0m * (q0m.transpose() * q);
    let residual = fro(&off_span);
    if residual > SPAN_TOL {
        return Err(Error::SpanMismatch { residual });
    }
    let g = q.transpose() * q0m;
    SpdMatrix::new(&g * p.d.as_mat() * g.transpose())
}

fn check_orthogonal(g: &Mat, k: usize) -> Result<()> {
    if g.shape() != (k, k) {
        return Err(dim_mismatch(
            "group_act",
            format!("{k}x{k}"),
            format!("{}x{}", g.nrows(), g.ncols()),
        ));
    }
    let residual = orthonormality_residual(g);
    if residual > ORTHO_TOL {
        return Err(Error::NotOrthonormal { residual });
    }
    Ok(())
}

/// Right O(k) action: `(Q, D) ↦ (QG, GᵀDG)` and `(B, T) ↦ (BG, GᵀTG)`.
pub fn group_act(g: &Mat, p: &BundlePoint, w: &BundleTangent) -> Result<(BundlePoint, BundleTangent)> {
    check_orthogonal(g, p.k())?;
    let point = BundlePoint {
        frame: p.frame.act(g),
        d: p.d.congruence(g),
    };
    let tangent = BundleTangent {
        b: &w.b * g,
        t: w.t.congruence(g),
    };
    Ok((point, tangent))
}

/// [`group_act`] on the point alone.
pub fn group_act_point(g: &Mat, p: &BundlePoint) -> Result<BundlePoint> {
    group_act(g, p, &BundleTangent::zeros(p.n(), p.k())).map(|(p, _)| p)
}
