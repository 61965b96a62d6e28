//! Randomized invariant suite covering every module.
//!
//! Each property is a per-trial error measure compared against a tolerance;
//! the report keeps the worst trial. Trials run through [`crate::batch`].

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::batch::map_trials;
use crate::bwgeom::{ambient_metric, bundle_metric, bw_distance, bw_distance_procrustes, dphi, dphi_inv, phi, phi_inv};
use crate::error::Result;
use crate::geodesics::{
    angular_momentum, energy, integrate, momentum, quotient_initial_data, quotient_line_oracle, vertical_geodesic,
    IntegrateOptions,
};
use crate::logmaps::{log_index_params, recover_block, sample_log_family};
use crate::manifolds::{group_act, principal_angles, stiefel_split, StiefelPoint, StiefelTangent};
use crate::matkernels::{
    fro, gaussian_matrix, psd_sqrt, random_orthogonal, sylvester_solve, sym_eig, thin_svd, DetSign, Mat, SpdMatrix,
    SymMatrix,
};
use crate::sampling::{
    random_commuting_state, random_factor, random_frame, random_point, random_spd, random_state, random_sym,
    random_tangent, random_vertical_state,
};
use crate::tolerance::Tolerances;

/// Outcome of one property over all trials.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub name: String,
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl PropertyReport {
    pub fn new(name: impl Into<String>, worst: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            worst,
            tolerance,
            passed: worst <= tolerance,
        }
    }
}

impl fmt::Display for PropertyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}  {:<44} worst {:>10.3e}  tol {:.1e}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.worst,
            self.tolerance
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub seed: u64,
    pub trials: usize,
    /// Step used by every integration property.
    pub dt: f64,
    pub tol: Tolerances,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 20,
            dt: 1e-3,
            tol: Tolerances::default(),
        }
    }
}

type Check = fn(&mut ChaCha8Rng, &VerifyConfig) -> Result<f64>;

fn dims(rng: &mut impl Rng) -> (usize, usize) {
    const DIMS: [(usize, usize); 5] = [(3, 1), (4, 2), (5, 3), (6, 2), (8, 4)];
    DIMS[rng.random_range(0..DIMS.len())]
}

fn sylvester_residual(rng: &mut ChaCha8Rng, _: &VerifyConfig) -> Result<f64> {
    let k = rng.random_range(1..7);
    let d = random_spd(k, rng);
    let t = random_sym(k, 1.0, rng);
    let s = sylvester_solve(&d, &t)?;
    let r = d.as_mat() * s.as_mat() + s.as_mat() * d.as_mat() - t.as_mat();
    Ok(fro(&r) / fro(t.as_mat()).max(1.0))
}

fn sylvester_equivariance(rng: &mut ChaCha8Rng, _: &VerifyConfig) -> Result<f64> {
    let k = rng.random_range(1..7);
    let d = random_spd(k, rng);
    let t = random_sym(k, 1.0, rng);
    let g = random_orthogonal(k, rng.random(), DetSign::Minus);
    let lhs = sylvester_solve(&d.congruence(&g), &t.congruence(&g))?;
    let rhs = sylvester_solve(&d, &t)?.congruence(&g);
    Ok(fro(&(lhs.as_mat() - rhs.as_mat())))
}

fn eig_reconstruction(rng: &mut ChaCha8Rng, _: &VerifyConfig) -> Result<f64> {
    let k = rng.random_range(1..9);
    let a = random_sym(k, 1.0, rng);
    let e = sym_eig(&a)?;
    Ok(fro(&(e.reconstruct() - a.as_mat())) / fro(a.as_mat()).max(1.0))
}

fn sqrt_squares_back(rng: &mut ChaCha8Rng, _: &VerifyConfig) -> Result<f64> {
    let n = rng.random_range(2..8);
    let k = rng.random_range(1..=n);
    let x = gaussian_matrix(n, k, rng);
    let a = SymMatrix::new(&x * x.transpose())?;
    let r = psd_sqrt(&a)?;
    Ok(fro(&(r.as_mat() * r.as_mat() - a.as_mat())) / fro(a.as_mat()))
}

fn svd_reconstruction(rng: &mut ChaCha8Rng, _: &VerifyConfig) -> Result<f64> {
    let (n, k) = dims(rng);
    let a = gaussian_matrix(n, k, rng);
    Ok(fro(&(thin_svd(&a)?.reconstruct() - &a)) / fro(&a))
}

fn split_round_trip(rng: &mut ChaCha8Rng, _: &VerifyConfig) -> Result<f64> {
    let (n, k) = dims(rng);
    let frame = random_frame(n, k, rng);
    let w = StiefelTangent::new(gaussian_matrix(k, k, rng), gaussian_matrix(n - k, k, rng));
    let v = w.to_ambient(&frame);
    let back = stiefel_split(&frame, &v)?;
    Ok(fro(&(back.a() - w.a())) + fro(&(&back.b - &w.b)) + fro(&(back.to_ambient(&frame) - v)))
}

fn angles_invariance(rng: &mut ChaCha8Rng, _: &VerifyConfig) -> Result<f64> {
    let (n, k) = dims(rng);
    let q1 = random_frame(n, k, rng).q().clone();
    let q2 = random_frame(n, k, rng).q().clone();
    let base = principal_angles(&q1, &q2)?;
    let swapped = principal_angles(&q2, &q1)?;
    let g = random_orthogonal(k, rng.random(), DetSign::Minus);
    let acted = principal_angles(&q1.act(&g), &q2)?;
    let worst = base
        .angles
        .iter()
        .zip(&swapped.angles)
        .zip(&acted.angles)
        .map(|((a, b), c)| (a - b).abs().max((a - c).abs()))
        .fold(0.0, f64::max);
    Ok(worst)
}

fn group_action_fixes_sigma(rng: &mut ChaCha8Rng, _: &VerifyConfig) -> Result<f64> {
    let (n, k) = dims(rng);
    let p = random_point(n, k, rng);
    let w = random_tangent(n, k, rng);
    let g = random_orthogonal(k, rng.random(), DetSign::Minus);
    let (pg, wg) = group_act(&g, &p, &w)?;
    let ds = fro(&(pg.sigma() - p.sigma())) / fro(&p.sigma());
    let dv = fro(&(dphi(&pg, &wg).as_mat() - dphi(&p, &w).as_mat())) / (1.0 + fro(dphi(&p, &w).as_mat()));
    Ok(ds.max(dv))
}

fn phi_round_trip(rng: &mut ChaCha8Rng, _: &VerifyConfig) -> Result<f64> {
    let (n, k) = dims(rng);
    let p = random_point(n, k, rng);
    let sigma = p.sigma();
    let back = phi(&phi_inv(&phi(&p))?);
    Ok(fro(&(back.sigma() - &sigma)) / fro(&sigma))
}

fn dphi_round_trip(rng: &mut ChaCha8Rng, _: &VerifyConfig) -> Result<f64> {
    let (n, k) = dims(rng);
    let p = random_point(n, k, rng);
    let w = random_tangent(n, k, rng);
    let back = dphi_inv(&p, dphi(&p, &w).as_mat())?;
    let scale = 1.0 + fro(&w.b) + fro(w.t.as_mat());
    Ok((fro(&(&back.b - &w.b)) + fro(&(back.t.as_mat() - w.t.as_mat()))) / scale)
}

fn metric_consistency(rng: &mut ChaCha8Rng, _: &VerifyConfig) -> Result<f64> {
    let (n, k) = dims(rng);
    let p = random_point(n, k, rng);
    let w1 = random_tangent(n, k, rng);
    let w2 = random_tangent(n, k, rng);
    let h = bundle_metric(&p, &w1, &w2)?;
    let g = ambient_metric(&phi(&p), &dphi(&p, &w1), &dphi(&p, &w2))?;
    let gg = random_orthogonal(k, rng.random(), DetSign::Plus);
    let (pg, w1g) = group_act(&gg, &p, &w1)?;
    let (_, w2g) = group_act(&gg, &p, &w2)?;
    let hg = bundle_metric(&pg, &w1g, &w2g)?;
    let scale = h.abs().max(1.0);
    Ok(((h - g).abs().max((h - hg).abs())) / scale)
}

fn distance_cross_oracle(rng: &mut ChaCha8Rng, _: &VerifyConfig) -> Result<f64> {
    let (n, k) = dims(rng);
    let x = random_factor(n, k, rng);
    let y = random_factor(n, k, rng);
    let a = bw_distance(&(&x * x.transpose()), &(&y * y.transpose()))?;
    let b = bw_distance_procrustes(&x, &y)?;
    Ok((a - b).abs())
}

fn geodesic_dims(rng: &mut impl Rng) -> (usize, usize) {
    const DIMS: [(usize, usize); 3] = [(4, 2), (5, 3), (6, 2)];
    DIMS[rng.random_range(0..DIMS.len())]
}

fn opts(cfg: &VerifyConfig) -> IntegrateOptions {
    IntegrateOptions {
        dt: cfg.dt,
        ..Default::default()
    }
}

fn oracle_equivalence(rng: &mut ChaCha8Rng, cfg: &VerifyConfig) -> Result<f64> {
    let (n, k) = geodesic_dims(rng);
    let s0 = random_state(n, k, rng);
    let (x0, h) = quotient_initial_data(&s0)?;
    let traj = integrate(&s0, &opts(cfg))?;
    let scale = 1.0 + fro(&(&x0 * x0.transpose()));
    let mut worst = 0.0f64;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let line = quotient_line_oracle(&x0, &h, *t)?;
        worst = worst.max(fro(&(&s.q * &s.d * s.q.transpose() - line.sigma())) / scale);
    }
    Ok(worst)
}

fn energy_conservation(rng: &mut ChaCha8Rng, cfg: &VerifyConfig) -> Result<f64> {
    let (n, k) = geodesic_dims(rng);
    let s0 = random_state(n, k, rng);
    let traj = integrate(&s0, &opts(cfg))?;
    Ok(traj.max_energy_drift() / energy(&s0))
}

fn angular_momentum_conservation(rng: &mut ChaCha8Rng, cfg: &VerifyConfig) -> Result<f64> {
    let (n, k) = geodesic_dims(rng);
    let s0 = random_state(n, k, rng);
    let traj = integrate(&s0, &opts(cfg))?;
    Ok(traj.max_angular_momentum_residual() / fro(&angular_momentum(&s0)).max(1.0))
}

fn momentum_commuting(rng: &mut ChaCha8Rng, cfg: &VerifyConfig) -> Result<f64> {
    let (n, k) = geodesic_dims(rng);
    let s0 = random_commuting_state(n, k, rng);
    let traj = integrate(&s0, &opts(cfg))?;
    let drift = traj.max_momentum_residual() / fro(&momentum(&s0)).max(1.0);
    let e = traj.max_energy_drift() / energy(&s0).max(f64::MIN_POSITIVE);
    Ok(drift.max(e))
}

fn frame_orthogonality(rng: &mut ChaCha8Rng, cfg: &VerifyConfig) -> Result<f64> {
    let (n, k) = geodesic_dims(rng);
    let s0 = random_state(n, k, rng);
    Ok(integrate(&s0, &opts(cfg))?.max_orthogonality_residual())
}

fn fibers_frame_constant(rng: &mut ChaCha8Rng, cfg: &VerifyConfig) -> Result<f64> {
    let (n, k) = geodesic_dims(rng);
    let s0 = random_vertical_state(n, k, rng);
    let traj = integrate(&s0, &opts(cfg))?;
    Ok(traj.states.iter().map(|s| fro(&(&s.q - &s0.q))).fold(0.0, f64::max))
}

fn fibers_closed_form(rng: &mut ChaCha8Rng, cfg: &VerifyConfig) -> Result<f64> {
    let (n, k) = geodesic_dims(rng);
    let s0 = random_vertical_state(n, k, rng);
    let traj = integrate(&s0, &opts(cfg))?;
    let d0 = SpdMatrix::new(s0.d.clone())?;
    let sv = SymMatrix::new(s0.s.clone())?;
    let mut worst = 0.0f64;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let exact = vertical_geodesic(&d0, &sv, *t)?;
        worst = worst.max(fro(&(&s.d - exact.as_mat())) / fro(exact.as_mat()));
    }
    Ok(worst)
}

fn gauge_covariance(rng: &mut ChaCha8Rng, cfg: &VerifyConfig) -> Result<f64> {
    let (n, k) = geodesic_dims(rng);
    let s0 = random_state(n, k, rng);
    let g = random_orthogonal(k, rng.random(), DetSign::Minus);
    let o = IntegrateOptions {
        t_max: 0.25,
        ..opts(cfg)
    };
    let a = integrate(&s0, &o)?;
    let b = integrate(&s0.act(&g), &o)?;
    let (sa, sb) = (a.last(), b.last());
    let sigma_a = &sa.q * &sa.d * sa.q.transpose();
    let sigma_b = &sb.q * &sb.d * sb.q.transpose();
    Ok(fro(&(sigma_a - &sigma_b)) / (1.0 + fro(&sigma_b)))
}

/// Pair with a prescribed number `r` of orthogonal principal angles, n = 6, k = 3.
fn log_pair(r: usize, rng: &mut ChaCha8Rng) -> (Mat, Mat) {
    let o = random_orthogonal(6, rng.random(), DetSign::Plus);
    let l = 3 - r;
    let xs = o.columns(0, 3).into_owned();
    let mut ys = Mat::zeros(6, 3);
    ys.columns_mut(0, l).copy_from(&o.columns(0, l));
    ys.columns_mut(l, r).copy_from(&o.columns(3, r));
    let (a, b) = (mixer(rng), mixer(rng));
    (xs * a, ys * b)
}

/// Invertible 3×3 with singular values in [0.5, 2].
fn mixer(rng: &mut ChaCha8Rng) -> Mat {
    let scales: Vec<f64> = (0..3).map(|_| rng.random_range(0.5..2.0)).collect();
    random_orthogonal(3, rng.random(), DetSign::Plus) * Mat::from_diagonal(&nalgebra::DVector::from_vec(scales))
}

fn log_certificate(rng: &mut ChaCha8Rng, cfg: &VerifyConfig) -> Result<f64> {
    let r = rng.random_range(0..3);
    let (x, y) = log_pair(r, rng);
    let p = log_index_params(&x, &y, &cfg.tol)?;
    if p.r != r {
        return Ok(f64::INFINITY);
    }
    let seeds: Vec<u64> = (0..3).map(|_| rng.random()).collect();
    let fam = sample_log_family(&p, &seeds)?;
    let smax = p.sigma[0];
    Ok(fam.iter().map(|c| c.residual / (1.0 + smax)).fold(0.0, f64::max))
}

fn log_round_trip(rng: &mut ChaCha8Rng, cfg: &VerifyConfig) -> Result<f64> {
    let (x, y) = log_pair(2, rng);
    let p = log_index_params(&x, &y, &cfg.tol)?;
    let mut worst = 0.0f64;
    for sign in [DetSign::Plus, DetSign::Minus] {
        let rr = random_orthogonal(2, rng.random(), sign);
        let c = crate::logmaps::build_log_rotation(&p, &rr)?;
        worst = worst.max(fro(&(recover_block(&p, &c.rotation) - rr)));
    }
    Ok(worst)
}

fn log_rank_geometry(rng: &mut ChaCha8Rng, cfg: &VerifyConfig) -> Result<f64> {
    let r = rng.random_range(0..4);
    let (x, y) = if r == 3 {
        let o = random_orthogonal(6, rng.random(), DetSign::Plus);
        (o.columns(0, 3).into_owned(), o.columns(3, 3).into_owned())
    } else {
        log_pair(r, rng)
    };
    let q1 = StiefelPoint::from_span(&x)?;
    let q2 = StiefelPoint::from_span(&y)?;
    let count = principal_angles(&q1, &q2)?.orthogonal_count(cfg.tol.angle_tol);
    let p = log_index_params(&x, &y, &cfg.tol)?;
    Ok(if p.r == r && count == r { 0.0 } else { f64::INFINITY })
}

/// Every property as `(name, check, tolerance)`.
pub const PROPERTIES: [(&str, Check, f64); 22] = [
    ("matkernels: Sylvester residual", sylvester_residual, 1e-10),
    ("matkernels: Sylvester equivariance", sylvester_equivariance, 1e-9),
    ("matkernels: sym_eig reconstruction", eig_reconstruction, 1e-10),
    ("matkernels: psd_sqrt squares back", sqrt_squares_back, 1e-9),
    ("matkernels: thin_svd reconstruction", svd_reconstruction, 1e-10),
    ("manifolds: Stiefel split round trip", split_round_trip, 1e-9),
    ("manifolds: principal angles invariance", angles_invariance, 1e-9),
    (
        "manifolds: O(k) action fixes Sigma, dphi",
        group_action_fixes_sigma,
        1e-10,
    ),
    ("bwgeom: phi(phi_inv(Sigma)) = Sigma", phi_round_trip, 1e-9),
    ("bwgeom: dphi_inv(dphi(w)) = w", dphi_round_trip, 1e-9),
    ("bwgeom: pullback metric consistency", metric_consistency, 1e-9),
    ("bwgeom: distance cross-oracle", distance_cross_oracle, 1e-8),
    ("geodesics: quotient-line oracle", oracle_equivalence, 1e-6),
    ("geodesics: energy (relative)", energy_conservation, 1e-7),
    (
        "geodesics: angular momentum (relative)",
        angular_momentum_conservation,
        1e-7,
    ),
    ("geodesics: BD and energy, commuting data", momentum_commuting, 1e-7),
    ("geodesics: frame orthogonality", frame_orthogonality, 1e-8),
    ("geodesics: fibers keep Q constant", fibers_frame_constant, 1e-9),
    ("geodesics: fibers match closed form", fibers_closed_form, 1e-7),
    ("geodesics: gauge covariance", gauge_covariance, 1e-9),
    ("logmaps: certificate", log_certificate, 1e-8),
    ("logmaps: R_r round trip", log_round_trip, 1e-9),
];

/// The rank/angle consistency check is reported separately since it is a count.
pub const LOG_RANK_PROPERTY: (&str, Check, f64) =
    ("logmaps: rank equals orthogonal angle count", log_rank_geometry, 0.0);

fn trial_rng(seed: u64, property: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((property as u64) << 32) | trial as u64);
    rng
}

/// Runs one property; an error in any trial counts as an infinite failure.
pub fn run_property(index: usize, name: &str, check: Check, tol: f64, cfg: &VerifyConfig) -> PropertyReport {
    let worst = map_trials(cfg.trials, |i| {
        let mut rng = trial_rng(cfg.seed, index, i);
        match check(&mut rng, cfg) {
            Ok(v) if v.is_finite() => v,
            Ok(_) | Err(_) => f64::INFINITY,
        }
    })
    .into_iter()
    .fold(0.0, f64::max);
    PropertyReport::new(name, worst, tol)
}

pub fn run_verify(cfg: &VerifyConfig) -> Vec<PropertyReport> {
    let mut out: Vec<PropertyReport> = PROPERTIES
        .iter()
        .enumerate()
        .map(|(i, (name, check, tol))| run_property(i, name, *check, *tol, cfg))
        .collect();
    let (name, check, tol) = LOG_RANK_PROPERTY;
    out.push(run_property(PROPERTIES.len(), name, check, tol, cfg));
    out
}

pub fn all_passed(reports: &[PropertyReport]) -> bool {
    reports.iter().all(|r| r.passed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_trials_is_vacuous() {
        let reports = run_verify(&VerifyConfig {
            trials: 0,
            ..Default::default()
        });
        assert_eq!(reports.len(), PROPERTIES.len() + 1);
        assert!(all_passed(&reports));
    }

    #[test]
    fn default_suite_passes() {
        let reports = run_verify(&VerifyConfig {
            trials: 3,
            seed: 11,
            ..Default::default()
        });
        for r in &reports {
            assert!(r.passed, "{r}");
        }
    }

    #[test]
    fn coarse_step_fails() {
        let cfg = VerifyConfig {
            trials: 3,
            dt: 0.5,
            ..Default::default()
        };
        let (name, check, tol) = PROPERTIES[13];
        let r = run_property(13, name, check, tol, &cfg);
        assert!(!r.passed, "{r}");
    }

    #[test]
    fn reports_are_reproducible() {
        let cfg = VerifyConfig {
            trials: 2,
            seed: 4,
            ..Default::default()
        };
        let (name, check, tol) = PROPERTIES[12];
        assert_eq!(
            run_property(12, name, check, tol, &cfg),
            run_property(12, name, check, tol, &cfg)
        );
    }

    #[test]
    fn nan_fails() {
        assert!(!PropertyReport::new("x", f64::NAN, 1.0).passed);
        assert!(PropertyReport::new("x", 1.0, 1.0).passed);
    }
}
