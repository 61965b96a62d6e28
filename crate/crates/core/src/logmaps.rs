//! Multiplicity of logarithms between two rank-k covariance matrices.
//!
//! For `Σ₁ = XXᵀ`, `Σ₂ = YYᵀ` write `XᵀY = UΣVᵀ` with `l = rank(XᵀY)` and
//! `r = k − l`. The rotations `R ∈ O(k)` with `XᵀYR = (XᵀYYᵀX)^{1/2}` are
//! exactly `R = V diag(I_l, R_r) Uᵀ` for `R_r ∈ O(r)`, so the family is a
//! copy of O(r). The same `r` counts the orthogonal principal angles between
//! the two images.

use crate::bwgeom::{check_full_column_rank, phi_inv, PsdFixedRank};
use crate::error::{dim_mismatch, Error, Result};
use crate::manifolds::{principal_angles, PrincipalAngles};
use crate::matkernels::{fro, orthonormality_residual, psd_sqrt, random_orthogonal, thin_svd, DetSign, Mat, SymMatrix};
use crate::tolerance::Tolerances;

const CERT_TOL: f64 = 1e-8;
const ORTHO_TOL: f64 = 1e-10;

/// Rank of `XᵀY` and the defect `r = k − l`, cross-checked against principal angles.
#[derive(Debug, Clone, PartialEq)]
pub struct LogRank {
    pub l: usize,
    pub r: usize,
    pub angles: PrincipalAngles,
    /// Principal-angle cosines within a factor 10 of the orthogonality cutoff.
    pub borderline: usize,
}

/// SVD parameterization of the logarithm index set.
#[derive(Debug, Clone, PartialEq)]
pub struct LogIndexParams {
    pub u: Mat,
    pub sigma: Vec<f64>,
    pub v: Mat,
    pub l: usize,
    pub r: usize,
    /// `XᵀY`
    pub cross: Mat,
    /// `(XᵀYYᵀX)^{1/2}`
    pub root: Mat,
    pub borderline: usize,
}

impl LogIndexParams {
    pub fn k(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_unique(&self) -> bool {
        self.r == 0
    }
}

fn check_pair(x: &Mat, y: &Mat) -> Result<()> {
    if x.shape() != y.shape() {
        return Err(dim_mismatch(
            "log_rank",
            format!("{}x{}", x.nrows(), x.ncols()),
            format!("{}x{}", y.nrows(), y.ncols()),
        ));
    }
    check_full_column_rank(x)?;
    check_full_column_rank(y)
}

/// `l = rank(XᵀY)`, `r = k − l`; errors if `r` disagrees with the count of
/// orthogonal principal angles between `span X` and `span Y`.
pub fn log_rank(x: &Mat, y: &Mat, tol: &Tolerances) -> Result<LogRank> {
    check_pair(x, y)?;
    let k = x.ncols();
    // Scale by ‖X‖‖Y‖ as well, so XᵀY ≈ 0 (orthogonal spans) has rank 0, not noise rank.
    let cross = thin_svd(&(x.transpose() * y))?;
    let scale = thin_svd(x)?.sigma[0] * thin_svd(y)?.sigma[0];
    let smax = cross.sigma.iter().copied().fold(0.0, f64::max);
    let threshold = tol.rank_tol * smax.max(scale);
    let l = cross.sigma.iter().filter(|&&s| s > threshold).count();
    let r = k - l;
    let q1 = phi_inv(&PsdFixedRank::from_full_rank_factor(x)?)?;
    let q2 = phi_inv(&PsdFixedRank::from_full_rank_factor(y)?)?;
    let angles = principal_angles(q1.frame.q(), q2.frame.q())?;
    let angle_count = angles.orthogonal_count(tol.angle_tol);
    if angle_count != r {
        return Err(Error::CountMismatch {
            svd_rank: l,
            angle_count,
            expected: r,
        });
    }
    let borderline = angles.borderline_count(tol.angle_tol);
    Ok(LogRank {
        l,
        r,
        angles,
        borderline,
    })
}

pub fn log_index_params(x: &Mat, y: &Mat, tol: &Tolerances) -> Result<LogIndexParams> {
    let rank = log_rank(x, y, tol)?;
    let cross = x.transpose() * y;
    let svd = thin_svd(&cross)?;
    let root = psd_sqrt(&SymMatrix::new(&cross * cross.transpose())?)?.into_mat();
    Ok(LogIndexParams {
        u: svd.u,
        sigma: svd.sigma.iter().copied().collect(),
        v: svd.v,
        l: rank.l,
        r: rank.r,
        cross,
        root,
        borderline: rank.borderline,
    })
}

/// A member of the index set together with its certificate residual.
#[derive(Debug, Clone, PartialEq)]
pub struct CertifiedRotation {
    pub rotation: Mat,
    /// `‖XᵀYR − (XᵀYYᵀX)^{1/2}‖_F`
    pub residual: f64,
}

/// `R = V diag(I_l, R_r) Uᵀ`, certified against `XᵀYR = (XᵀYYᵀX)^{1/2}`.
pub fn build_log_rotation(p: &LogIndexParams, rr: &Mat) -> Result<CertifiedRotation> {
    let (k, l, r) = (p.k(), p.l, p.r);
    if rr.shape() != (r, r) {
        return Err(dim_mismatch(
            "build_log_rotation",
            format!("{r}x{r}"),
            format!("{}x{}", rr.nrows(), rr.ncols()),
        ));
    }
    let ortho = orthonormality_residual(rr);
    if ortho > ORTHO_TOL {
        return Err(Error::NotOrthonormal { residual: ortho });
    }
    let mut block = Mat::identity(k, k);
    block.view_mut((l, l), (r, r)).copy_from(rr);
    let rotation = &p.v * block * p.u.transpose();
    let residual = fro(&(&p.cross * &rotation - &p.root));
    let smax = p.sigma.first().copied().unwrap_or(0.0);
    if !residual.is_finite() || residual > CERT_TOL * (1.0 + smax) {
        return Err(Error::CertificateFailure { residual });
    }
    Ok(CertifiedRotation { rotation, residual })
}

/// The `R_r` block of a family member: lower-right r×r block of `VᵀRU`.
pub fn recover_block(p: &LogIndexParams, rotation: &Mat) -> Mat {
    let full = p.v.transpose() * rotation * &p.u;
    full.view((p.l, p.l), (p.r, p.r)).into_owned()
}

/// Certified samples of the family: one draw of `R_r` per seed and determinant
/// sign, with coincident rotations merged. For `r = 0` this is the single
/// rotation `VUᵀ`; for `r = 1` it is the two branches `R_r = ±1`.
pub fn sample_log_family(p: &LogIndexParams, seeds: &[u64]) -> Result<Vec<CertifiedRotation>> {
    if p.r == 0 {
        return Ok(vec![build_log_rotation(p, &Mat::zeros(0, 0))?]);
    }
    let mut out: Vec<CertifiedRotation> = Vec::new();
    for &seed in seeds {
        for sign in [DetSign::Plus, DetSign::Minus] {
            let rr = random_orthogonal(p.r, seed, sign);
            let cand = build_log_rotation(p, &rr)?;
            if out.iter().all(|c| fro(&(&c.rotation - &cand.rotation)) > 1e-9) {
                out.push(cand);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matkernels::gaussian_matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cols(n: usize, idx: &[usize]) -> Mat {
        Mat::from_fn(n, idx.len(), |r, c| if r == idx[c] { 1.0 } else { 0.0 })
    }

    #[test]
    fn rank_cases() {
        let tol = Tolerances::default();
        let x = gaussian_matrix(5, 3, &mut ChaCha8Rng::seed_from_u64(1));
        let lr = log_rank(&x, &x, &tol).unwrap();
        assert_eq!((lr.l, lr.r), (3, 0));

        let lr = log_rank(&cols(3, &[0, 1]), &cols(3, &[0, 2]), &tol).unwrap();
        assert_eq!((lr.l, lr.r), (1, 1));

        let lr = log_rank(&cols(4, &[0, 1]), &cols(4, &[2, 3]), &tol).unwrap();
        assert_eq!((lr.l, lr.r), (0, 2));

        // XᵀY is pure roundoff here, not exact zeros
        let o = crate::matkernels::random_orthogonal(6, 4, DetSign::Plus);
        let lr = log_rank(&o.columns(0, 3).into_owned(), &(o.columns(3, 3) * 3.0), &tol).unwrap();
        assert_eq!((lr.l, lr.r), (0, 3));
    }

    #[test]
    fn params_cases() {
        let tol = Tolerances::default();
        let q = crate::matkernels::random_orthogonal(5, 2, DetSign::Plus)
            .columns(0, 3)
            .into_owned();
        let p = log_index_params(&q, &q, &tol).unwrap();
        assert!(p.sigma.iter().all(|s| (s - 1.0).abs() < 1e-12));
        assert_eq!(p.l, 3);
        assert!(
            fro(
                &(&p.u * Mat::from_diagonal(&nalgebra::DVector::from_vec(p.sigma.clone())) * p.v.transpose()
                    - &p.cross)
            ) < 1e-10
        );

        let p = log_index_params(&cols(3, &[0, 1]), &cols(3, &[0, 2]), &tol).unwrap();
        assert!((p.sigma[0] - 1.0).abs() < 1e-15 && p.sigma[1].abs() < 1e-15);

        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = gaussian_matrix(6, 3, &mut rng);
        let y = gaussian_matrix(6, 3, &mut rng);
        let p = log_index_params(&x, &y, &tol).unwrap();
        assert_eq!(p.r, 0);
        assert_eq!(sample_log_family(&p, &[1, 2, 3]).unwrap().len(), 1);
    }

    #[test]
    fn unique_rotation_is_vut() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = gaussian_matrix(5, 2, &mut rng);
        let y = gaussian_matrix(5, 2, &mut rng);
        let p = log_index_params(&x, &y, &Tolerances::default()).unwrap();
        let c = build_log_rotation(&p, &Mat::zeros(0, 0)).unwrap();
        assert!(fro(&(&c.rotation - &p.v * p.u.transpose())) < 1e-14);
        assert!(c.residual < 1e-10);
    }

    #[test]
    fn fully_orthogonal_accepts_anything() {
        let p = log_index_params(&cols(4, &[0, 1]), &cols(4, &[2, 3]), &Tolerances::default()).unwrap();
        assert_eq!(p.r, 2);
        for seed in 0..4 {
            let rr = random_orthogonal(2, seed, DetSign::Minus);
            let c = build_log_rotation(&p, &rr).unwrap();
            assert_eq!(c.residual, 0.0);
        }
    }

    #[test]
    fn r1_has_two_branches() {
        let p = log_index_params(&cols(3, &[0, 1]), &cols(3, &[0, 2]), &Tolerances::default()).unwrap();
        let plus = build_log_rotation(&p, &Mat::from_element(1, 1, 1.0)).unwrap();
        let minus = build_log_rotation(&p, &Mat::from_element(1, 1, -1.0)).unwrap();
        assert!(fro(&(&plus.rotation - &minus.rotation)) > 1.0);
        let fam = sample_log_family(&p, &(0..10).collect::<Vec<_>>()).unwrap();
        assert_eq!(fam.len(), 2);
    }

    #[test]
    fn r2_family_round_trips() {
        // span(e1, e2, e3) vs span(e1, e4, e5): one shared direction, two orthogonal
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = gaussian_matrix(3, 3, &mut rng);
        let b = gaussian_matrix(3, 3, &mut rng);
        let x = cols(6, &[0, 1, 2]) * a;
        let y = cols(6, &[0, 3, 4]) * b;
        let p = log_index_params(&x, &y, &Tolerances::default()).unwrap();
        assert_eq!((p.l, p.r), (1, 2));
        let fam = sample_log_family(&p, &(0..10).collect::<Vec<_>>()).unwrap();
        assert_eq!(fam.len(), 20);
        for (i, seed) in (0..10u64).enumerate() {
            let rr = random_orthogonal(2, seed, DetSign::Plus);
            let back = recover_block(&p, &fam[2 * i].rotation);
            assert!(fro(&(back - rr)) < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_block() {
        let p = log_index_params(&cols(3, &[0, 1]), &cols(3, &[0, 2]), &Tolerances::default()).unwrap();
        assert!(matches!(
            build_log_rotation(&p, &Mat::identity(2, 2)),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            build_log_rotation(&p, &Mat::from_element(1, 1, 0.5)),
            Err(Error::NotOrthonormal { .. })
        ));
    }
}
