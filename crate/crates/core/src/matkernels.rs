//! Dense symmetric linear-algebra kernels.
//!
//! Everything here works on small dense matrices (`n` up to a few hundred).
//! Eigen- and singular-vectors carry a deterministic sign: the entry of
//! largest magnitude in each column is made positive, ties going to the
//! lowest row index.

use nalgebra::{DMatrix, DVector, SymmetricEigen, QR};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{dim_mismatch, Error, Result};
use crate::tolerance::PSD_CLAMP;

pub type Mat = DMatrix<f64>;

/// Frobenius norm.
#[inline]
pub fn fro(m: &Mat) -> f64 {
    m.norm()
}

/// `(A + Aᵀ)/2`
pub fn symmetrize(m: &Mat) -> Mat {
    (m + m.transpose()) * 0.5
}

fn check_finite(m: &Mat, what: &'static str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

fn check_square(m: &Mat, op: &'static str) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(dim_mismatch(
            op,
            "square matrix",
            format!("{}x{}", m.nrows(), m.ncols()),
        ))
    }
}

/// Symmetric matrix, symmetrized on construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix(Mat);

impl SymMatrix {
    pub fn new(m: Mat) -> Result<Self> {
        check_square(&m, "SymMatrix::new")?;
        check_finite(&m, "SymMatrix::new")?;
        Ok(Self(symmetrize(&m)))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(Mat::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Self(Mat::identity(dim, dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        Self(Mat::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_mat(&self) -> &Mat {
        &self.0
    }

    pub fn into_mat(self) -> Mat {
        self.0
    }

    /// Congruence `GᵀAG`.
    pub fn congruence(&self, g: &Mat) -> SymMatrix {
        SymMatrix(symmetrize(&(g.transpose() * &self.0 * g)))
    }
}

/// Symmetric positive definite matrix.
///
/// Accepted when every eigenvalue exceeds `dim · ε · λ_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdMatrix(Mat);

impl SpdMatrix {
    pub fn new(m: Mat) -> Result<Self> {
        let sym = SymMatrix::new(m)?;
        Self::from_sym(sym)
    }

    pub fn from_sym(sym: SymMatrix) -> Result<Self> {
        let dim = sym.dim();
        if dim == 0 {
            return Err(Error::InvalidArgument("SPD matrix of dimension 0".into()));
        }
        let eig = sym_eig(&sym)?;
        let lmin = eig.values[0];
        let lmax = eig.values[dim - 1];
        let threshold = dim as f64 * f64::EPSILON * lmax.max(0.0);
        if lmax <= 0.0 || lmin <= threshold {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: lmin,
                threshold,
            });
        }
        Ok(Self(sym.into_mat()))
    }

    pub fn identity(dim: usize) -> Self {
        Self(Mat::identity(dim, dim))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        Self::from_sym(SymMatrix::from_diagonal(diag))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_mat(&self) -> &Mat {
        &self.0
    }

    pub fn into_mat(self) -> Mat {
        self.0
    }

    pub fn as_sym(&self) -> SymMatrix {
        SymMatrix(self.0.clone())
    }

    /// Inverse through the eigendecomposition.
    pub fn inverse(&self) -> Mat {
        let eig = sym_eig(&self.as_sym()).expect("SPD entries are finite");
        eig.map_values(|l| 1.0 / l)
    }

    /// Principal square root.
    pub fn sqrt(&self) -> SpdMatrix {
        let eig = sym_eig(&self.as_sym()).expect("SPD entries are finite");
        SpdMatrix(eig.map_values(f64::sqrt))
    }

    /// Congruence `GᵀDG` for orthogonal `G`.
    pub fn congruence(&self, g: &Mat) -> SpdMatrix {
        SpdMatrix(symmetrize(&(g.transpose() * &self.0 * g)))
    }
}

/// Eigendecomposition of a symmetric matrix, values ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub values: DVector<f64>,
    pub vectors: Mat,
}

impl EigenPair {
    /// `V f(Λ) Vᵀ`
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Mat {
        let mut scaled = self.vectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= f(self.values[j]);
        }
        symmetrize(&(scaled * self.vectors.transpose()))
    }

    pub fn reconstruct(&self) -> Mat {
        self.map_values(|l| l)
    }
}

/// Flip `col` so its largest-magnitude entry is positive. Returns whether it flipped.
fn canonical_sign(col: &[f64]) -> bool {
    let mut best = 0usize;
    let mut best_abs = -1.0;
    for (i, x) in col.iter().enumerate() {
        if x.abs() > best_abs {
            best_abs = x.abs();
            best = i;
        }
    }
    col.get(best).is_some_and(|x| *x < 0.0)
}

fn fix_column_signs(m: &mut Mat) -> Vec<bool> {
    let ncols = m.ncols();
    let mut flips = Vec::with_capacity(ncols);
    for j in 0..ncols {
        let flip = canonical_sign(m.column(j).as_slice());
        if flip {
            m.column_mut(j).neg_mut();
        }
        flips.push(flip);
    }
    flips
}

/// Symmetric eigendecomposition with ascending values and canonical signs.
pub fn sym_eig(a: &SymMatrix) -> Result<EigenPair> {
    let m = a.as_mat();
    check_finite(m, "sym_eig")?;
    let n = m.nrows();
    if n == 0 {
        return Ok(EigenPair {
            values: DVector::zeros(0),
            vectors: Mat::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::new(m.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = Mat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    fix_column_signs(&mut vectors);
    Ok(EigenPair { values, vectors })
}

/// Symmetric solution `S` of `DS + SD = T`.
///
/// Diagonalizes `D = VΛVᵀ` and divides `VᵀTV` entrywise by `λᵢ + λⱼ`.
pub fn sylvester_solve(d: &SpdMatrix, t: &SymMatrix) -> Result<SymMatrix> {
    if d.dim() != t.dim() {
        return Err(dim_mismatch("sylvester_solve", d.dim(), t.dim()));
    }
    let eig = sym_eig(&d.as_sym())?;
    let k = d.dim();
    let lmax = eig.values[k - 1];
    let threshold = k as f64 * f64::EPSILON * lmax.max(0.0);
    if eig.values[0] <= threshold {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: eig.values[0],
            threshold,
        });
    }
    let v = &eig.vectors;
    let mut tt = v.transpose() * t.as_mat() * v;
    for i in 0..k {
        for j in 0..k {
            tt[(i, j)] /= eig.values[i] + eig.values[j];
        }
    }
    SymMatrix::new(v * tt * v.transpose())
}

/// Square root of a PSD matrix.
///
/// Eigenvalues down to `-1e-10·λ_max` are accepted and clamped; anything at
/// or below the roundoff floor `n·ε·λ_max` is treated as an exact zero.
pub fn psd_sqrt(a: &SymMatrix) -> Result<SymMatrix> {
    let n = a.dim();
    if n == 0 {
        return Ok(SymMatrix::zeros(0));
    }
    let eig = sym_eig(a)?;
    let lmax = eig.values[n - 1].max(0.0);
    let clamp = PSD_CLAMP * lmax;
    if eig.values[0] < -clamp {
        return Err(Error::NegativeEigenvalue {
            eigenvalue: eig.values[0],
            threshold: -clamp,
        });
    }
    let floor = n as f64 * f64::EPSILON * lmax;
    Ok(SymMatrix(eig.map_values(|l| if l <= floor { 0.0 } else { l.sqrt() })))
}

/// Thin SVD `A = U diag(σ) Vᵀ` with `σ` descending.
#[derive(Debug, Clone, PartialEq)]
pub struct ThinSvd {
    /// n×k, orthonormal columns
    pub u: Mat,
    pub sigma: DVector<f64>,
    /// k×k orthogonal
    pub v: Mat,
}

impl ThinSvd {
    pub fn reconstruct(&self) -> Mat {
        let mut us = self.u.clone();
        for (j, mut col) in us.column_iter_mut().enumerate() {
            col *= self.sigma[j];
        }
        us * self.v.transpose()
    }

    /// Nuclear norm (sum of singular values).
    pub fn nuclear(&self) -> f64 {
        self.sigma.iter().sum()
    }

    /// Number of singular values above `rel_tol · σ_max`.
    pub fn rank(&self, rel_tol: f64) -> usize {
        let smax = self.sigma.iter().copied().fold(0.0, f64::max);
        if smax == 0.0 {
            return 0;
        }
        self.sigma.iter().filter(|&&s| s > rel_tol * smax).count()
    }
}

/// Thin SVD of an n×k matrix, n ≥ k.
pub fn thin_svd(a: &Mat) -> Result<ThinSvd> {
    check_finite(a, "thin_svd")?;
    let (n, k) = a.shape();
    if n < k {
        return Err(dim_mismatch("thin_svd", format!("n >= k = {k}"), n));
    }
    if k == 0 {
        return Ok(ThinSvd {
            u: Mat::zeros(n, 0),
            sigma: DVector::zeros(0),
            v: Mat::zeros(0, 0),
        });
    }
    let (u_raw, s_raw, v_raw) = jacobi_svd(a);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| s_raw[j].total_cmp(&s_raw[i]));
    let sigma = DVector::from_iterator(k, order.iter().map(|&i| s_raw[i]));
    let mut u = Mat::from_fn(n, k, |r, c| u_raw[(r, order[c])]);
    let mut v = Mat::from_fn(k, k, |r, c| v_raw[(r, order[c])]);
    for (j, flipped) in fix_column_signs(&mut u).into_iter().enumerate() {
        if flipped {
            v.column_mut(j).neg_mut();
        }
    }
    Ok(ThinSvd { u, sigma, v })
}

const JACOBI_SWEEPS: usize = 80;

/// One-sided (Hestenes) Jacobi SVD, unordered. Rotates column pairs of `A`
/// until they are orthogonal to working precision, so rank-deficient input is
/// handled without special cases; null columns of `U` are completed afterwards.
fn jacobi_svd(a: &Mat) -> (Mat, DVector<f64>, Mat) {
    let (n, k) = a.shape();
    let mut w = a.clone();
    let mut v = Mat::identity(k, k);
    for _ in 0..JACOBI_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let alpha = w.column(p).norm_squared();
                let beta = w.column(q).norm_squared();
                let gamma = w.column(p).dot(&w.column(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for m in [&mut w, &mut v] {
                    for i in 0..m.nrows() {
                        let (x, y) = (m[(i, p)], m[(i, q)]);
                        m[(i, p)] = c * x - s * y;
                        m[(i, q)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma = DVector::from_iterator(k, (0..k).map(|j| w.column(j).norm()));
    let smax = sigma.iter().copied().fold(0.0, f64::max);
    let mut u = Mat::zeros(n, k);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]));
    let mut filled: Vec<usize> = Vec::with_capacity(k);
    let project_out = |u: &Mat, filled: &[usize], col: &mut DVector<f64>| {
        for _ in 0..2 {
            for &f in filled {
                let proj = u.column(f).dot(col);
                col.axpy(-proj, &u.column(f), 1.0);
            }
        }
    };
    for &j in &order {
        let mut col = if sigma[j] > f64::MIN_POSITIVE && sigma[j] > 1e-300 * smax {
            w.column(j) / sigma[j]
        } else {
            DVector::zeros(n)
        };
        project_out(&u, &filled, &mut col);
        if col.norm() <= 0.5 {
            // null direction: the basis vector least inside the span so far
            col = (0..n)
                .map(|i| {
                    let mut e = DVector::zeros(n);
                    e[i] = 1.0;
                    project_out(&u, &filled, &mut e);
                    e
                })
                .max_by(|x, y| x.norm().total_cmp(&y.norm()))
                .expect("n >= 1");
        }
        col /= col.norm();
        u.set_column(j, &col);
        filled.push(j);
    }
    (u, sigma, v)
}

/// Orthogonal polar factor `UVᵀ` of a square matrix.
pub fn polar_factor(m: &Mat) -> Result<Mat> {
    check_square(m, "polar_factor")?;
    let svd = thin_svd(m)?;
    Ok(&svd.u * svd.v.transpose())
}

/// Determinant sign selector for [`random_orthogonal`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetSign {
    Plus,
    Minus,
}

impl DetSign {
    pub fn value(self) -> f64 {
        match self {
            DetSign::Plus => 1.0,
            DetSign::Minus => -1.0,
        }
    }
}

/// Haar-distributed orthogonal r×r matrix with prescribed determinant sign.
pub fn random_orthogonal(r: usize, seed: u64, det_sign: DetSign) -> Mat {
    if r == 0 {
        return Mat::zeros(0, 0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = Mat::from_fn(r, r, |_, _| StandardNormal.sample(&mut rng));
    let qr = QR::new(g);
    let mut q = qr.q();
    let rr = qr.r();
    for j in 0..r {
        if rr[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    if q.determinant().signum() != det_sign.value() {
        q.column_mut(r - 1).neg_mut();
    }
    q
}

/// Standard-normal n×k matrix from a seeded stream.
pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut impl rand::Rng) -> Mat {
    Mat::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// `‖MᵀM − I‖_F`
pub fn orthonormality_residual(m: &Mat) -> f64 {
    let k = m.ncols();
    fro(&(m.transpose() * m - Mat::identity(k, k)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn random_sym(k: usize, seed: u64) -> SymMatrix {
        SymMatrix::new(gaussian_matrix(k, k, &mut rng(seed))).unwrap()
    }

    fn random_spd(k: usize, seed: u64) -> SpdMatrix {
        let a = gaussian_matrix(k, k, &mut rng(seed));
        SpdMatrix::new(&a * a.transpose() + Mat::identity(k, k) * 0.5).unwrap()
    }

    /// Solve (I⊗D + D⊗I) vec(S) = vec(T) directly.
    fn kron_sylvester(d: &Mat, t: &Mat) -> Mat {
        let k = d.nrows();
        let eye = Mat::identity(k, k);
        let sys = eye.kronecker(d) + d.kronecker(&eye);
        let rhs = DVector::from_column_slice(t.as_slice());
        let sol = sys.lu().solve(&rhs).unwrap();
        Mat::from_column_slice(k, k, sol.as_slice())
    }

    #[test]
    fn sylvester_identity_half() {
        let s = sylvester_solve(
            &SpdMatrix::identity(3),
            &SymMatrix::new(Mat::identity(3, 3) * 0.5).unwrap(),
        )
        .unwrap();
        assert_abs_diff_eq!(fro(&(s.as_mat() - Mat::identity(3, 3) * 0.25)), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn sylvester_zero_rhs() {
        let d = random_spd(4, 1);
        let s = sylvester_solve(&d, &SymMatrix::zeros(4)).unwrap();
        assert_eq!(fro(s.as_mat()), 0.0);
    }

    #[test]
    fn sylvester_matches_kronecker_oracle() {
        let d = SpdMatrix::from_diagonal(&[1.0, 2.0]).unwrap();
        let t = SymMatrix::new(Mat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        let oracle = kron_sylvester(d.as_mat(), t.as_mat());
        // brute-force solution, frozen: off-diagonal 1/(1+2)
        assert_abs_diff_eq!(oracle[(0, 1)], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(oracle[(0, 0)], 0.0, epsilon = 1e-15);
        let s = sylvester_solve(&d, &t).unwrap();
        let expected = Mat::from_row_slice(2, 2, &[0.0, 1.0 / 3.0, 1.0 / 3.0, 0.0]);
        assert!(fro(&(s.as_mat() - expected)) < 1e-14);

        for seed in 0..10 {
            let d = random_spd(5, seed);
            let t = random_sym(5, seed + 100);
            let s = sylvester_solve(&d, &t).unwrap();
            let o = kron_sylvester(d.as_mat(), t.as_mat());
            assert!(fro(&(s.as_mat() - o)) < 1e-10);
        }
    }

    #[test]
    fn sylvester_rejects_mismatch_and_indefinite() {
        let err = sylvester_solve(&SpdMatrix::identity(2), &SymMatrix::zeros(3)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
        let err = SpdMatrix::from_diagonal(&[1.0, -1e-3]).unwrap_err();
        match err {
            Error::NotPositiveDefinite { min_eigenvalue, .. } => {
                assert_abs_diff_eq!(min_eigenvalue, -1e-3, epsilon = 1e-15)
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn eig_identity_and_swap() {
        let e = sym_eig(&SymMatrix::identity(2)).unwrap();
        assert_eq!(e.values.as_slice(), &[1.0, 1.0]);
        assert!(fro(&(&e.vectors - Mat::identity(2, 2))) < 1e-15);

        let swap = SymMatrix::new(Mat::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0])).unwrap();
        let e = sym_eig(&swap).unwrap();
        assert_abs_diff_eq!(e.values[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e.values[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn eig_reconstruction_and_signs() {
        let a = random_sym(5, 7);
        let e = sym_eig(&a).unwrap();
        assert!(orthonormality_residual(&e.vectors) < 1e-10);
        assert!(fro(&(e.reconstruct() - a.as_mat())) <= 1e-10 * fro(a.as_mat()));
        for w in e.values.as_slice().windows(2) {
            assert!(w[0] <= w[1]);
        }
        for col in e.vectors.column_iter() {
            let (i, _) = col.iter().enumerate().fold(
                (0, -1.0),
                |acc, (i, x)| {
                    if x.abs() > acc.1 {
                        (i, x.abs())
                    } else {
                        acc
                    }
                },
            );
            assert!(col[i] > 0.0);
        }
        assert_eq!(e, sym_eig(&a).unwrap());
    }

    #[test]
    fn eig_rejects_nan() {
        let mut m = Mat::identity(2, 2);
        m[(0, 1)] = f64::NAN;
        assert!(matches!(SymMatrix::new(m), Err(Error::NonFinite(_))));
    }

    #[test]
    fn psd_sqrt_cases() {
        let r = psd_sqrt(&SymMatrix::identity(3)).unwrap();
        assert!(fro(&(r.as_mat() - Mat::identity(3, 3))) < 1e-15);
        let r = psd_sqrt(&SymMatrix::from_diagonal(&[4.0, 9.0])).unwrap();
        assert!(fro(&(r.as_mat() - Mat::from_diagonal(&DVector::from_vec(vec![2.0, 3.0])))) < 1e-14);

        let m = gaussian_matrix(3, 5, &mut rng(3));
        let a = SymMatrix::new(m.transpose() * &m).unwrap();
        let r = psd_sqrt(&a).unwrap();
        let resid = fro(&(r.as_mat() * r.as_mat() - a.as_mat()));
        assert!(resid <= 1e-9 * fro(a.as_mat()).max(1.0));
        assert!(sym_eig(&r).unwrap().values[0] >= -1e-12 * fro(r.as_mat()));
    }

    #[test]
    fn psd_sqrt_clamps_and_rejects() {
        let r = psd_sqrt(&SymMatrix::from_diagonal(&[1.0, -1e-13])).unwrap();
        assert_eq!(r.as_mat()[(1, 1)], 0.0);
        let err = psd_sqrt(&SymMatrix::from_diagonal(&[1.0, -1e-6])).unwrap_err();
        assert!(matches!(err, Error::NegativeEigenvalue { .. }));
    }

    #[test]
    fn svd_cases() {
        let s = thin_svd(&Mat::identity(3, 3)).unwrap();
        assert_eq!(s.sigma.len(), 3);
        for x in s.sigma.iter() {
            assert_abs_diff_eq!(*x, 1.0, epsilon = 1e-15);
        }
        let q = QR::new(gaussian_matrix(5, 3, &mut rng(4))).q();
        let s = thin_svd(&q).unwrap();
        for x in s.sigma.iter() {
            assert_abs_diff_eq!(*x, 1.0, epsilon = 1e-13);
        }
        let a = gaussian_matrix(5, 3, &mut rng(5));
        let s = thin_svd(&a).unwrap();
        assert!(fro(&(s.reconstruct() - &a)) <= 1e-10 * fro(&a));
        assert!(orthonormality_residual(&s.u) < 1e-12);
        assert!(orthonormality_residual(&s.v) < 1e-12);
        assert!(s.sigma[0] >= s.sigma[1] && s.sigma[1] >= s.sigma[2]);
        assert!(thin_svd(&Mat::zeros(2, 3)).is_err());
    }

    #[test]
    fn svd_rank_deficient() {
        // exactly rank one; a bidiagonal QR SVD has returned a wrong U here
        let a = Mat::from_row_slice(
            3,
            3,
            &[
                -0.09200999115542574,
                -0.08044176733337786,
                0.02629922768860654,
                0.8185990170262856,
                0.7156782740661958,
                -0.23398026305727393,
                0.5667689524112919,
                0.49551027697238764,
                -0.16199964307266104,
            ],
        );
        let s = thin_svd(&a).unwrap();
        assert!(fro(&(s.reconstruct() - &a)) < 1e-13);
        assert!(orthonormality_residual(&s.u) < 1e-13);
        assert!(s.sigma[1] < 1e-14);

        let z = thin_svd(&Mat::zeros(4, 3)).unwrap();
        assert!(orthonormality_residual(&z.u) < 1e-14);
        assert_eq!(z.sigma.iter().copied().fold(0.0, f64::max), 0.0);

        let x = gaussian_matrix(6, 2, &mut rng(8));
        let low = &x * x.transpose();
        let s = thin_svd(&low).unwrap();
        assert!(fro(&(s.reconstruct() - &low)) < 1e-12 * fro(&low));
        assert!(orthonormality_residual(&s.u) < 1e-13 && orthonormality_residual(&s.v) < 1e-13);
        assert!(s.sigma[2] < 1e-13 * s.sigma[0]);
    }

    #[test]
    fn orthogonal_sampling() {
        assert_eq!(random_orthogonal(0, 1, DetSign::Plus).shape(), (0, 0));
        let m = random_orthogonal(1, 9, DetSign::Minus);
        assert_eq!(m[(0, 0)], -1.0);
        let m = random_orthogonal(1, 9, DetSign::Plus);
        assert_eq!(m[(0, 0)], 1.0);
        for seed in 0..5 {
            for sign in [DetSign::Plus, DetSign::Minus] {
                let q = random_orthogonal(3, seed, sign);
                assert!(orthonormality_residual(&q) <= 1e-12);
                assert_abs_diff_eq!(q.determinant(), sign.value(), epsilon = 1e-12);
                assert_eq!(q, random_orthogonal(3, seed, sign));
            }
        }
    }
}
