//! Geodesics of M(n,k) in bundle coordinates.
//!
//! The state `(Q, Q⊥, D, B, S)` evolves by
//!
//! ```text
//! Q̇  = Q⊥B          Q̇⊥ = −QBᵀ
//! Ḋ  = DS + SD      Ṡ  = BᵀB − S²
//! Ḃ  = −2BS                              (HorizontalLaw::Quotient)
//! Ḃ  = −BD⁻¹(DS + SD)                    (HorizontalLaw::AsPrinted)
//! ```
//!
//! The two horizontal laws agree whenever `D` and `S` commute (every k = 1
//! problem and every diagonal one). Only the quotient law reproduces the
//! straight lines `t ↦ (X₀ + tH)(X₀ + tH)ᵀ` for general data, so it is the
//! default. Under it `BD` is conserved only while `[D, S] = 0`; the exactly
//! conserved quantity is the angular momentum [`angular_momentum`].

use crate::bwgeom::{dphi, AmbientTangent, PsdFixedRank};
use crate::error::{dim_mismatch, Error, Result};
use crate::manifolds::{BundlePoint, BundleTangent, Frame, StiefelPoint};
use crate::matkernels::{
    fro, orthonormality_residual, polar_factor, sylvester_solve, sym_eig, symmetrize, Mat, SpdMatrix, SymMatrix,
};
use crate::tolerance::RANK_TOL;

/// Right-hand side used for `Ḃ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HorizontalLaw {
    /// `Ḃ = −2BS`
    #[default]
    Quotient,
    /// `Ḃ = −BD⁻¹(DS + SD)`
    AsPrinted,
}

/// Full state of the geodesic system. Also used for its time derivative.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicState {
    pub q: Mat,
    pub qperp: Mat,
    pub d: Mat,
    pub b: Mat,
    pub s: Mat,
}

impl GeodesicState {
    pub fn new(frame: &Frame, d: &SpdMatrix, b: Mat, s: &SymMatrix) -> Result<Self> {
        let (n, k) = (frame.n(), frame.k());
        if d.dim() != k || s.dim() != k {
            return Err(dim_mismatch(
                "GeodesicState::new",
                k,
                format!("D {}, S {}", d.dim(), s.dim()),
            ));
        }
        if b.shape() != (n - k, k) {
            return Err(dim_mismatch(
                "GeodesicState::new",
                format!("B {}x{}", n - k, k),
                format!("{}x{}", b.nrows(), b.ncols()),
            ));
        }
        Ok(Self {
            q: frame.q().as_mat().clone(),
            qperp: frame.qperp().clone(),
            d: d.as_mat().clone(),
            b,
            s: s.as_mat().clone(),
        })
    }

    /// State at `[Q, D]` with velocity `(Q⊥B, T)`; stores `S = S_D(T)`.
    pub fn from_bundle(p: &BundlePoint, w: &BundleTangent) -> Result<Self> {
        let s = sylvester_solve(&p.d, &w.t)?;
        Self::new(&p.frame, &p.d, w.b.clone(), &s)
    }

    pub fn n(&self) -> usize {
        self.q.nrows()
    }

    pub fn k(&self) -> usize {
        self.q.ncols()
    }

    /// `[Q Q⊥]`
    pub fn full_frame(&self) -> Mat {
        let (n, k) = (self.n(), self.k());
        let mut m = Mat::zeros(n, n);
        m.columns_mut(0, k).copy_from(&self.q);
        m.columns_mut(k, n - k).copy_from(&self.qperp);
        m
    }

    fn set_full_frame(&mut self, full: &Mat) {
        let (n, k) = (self.n(), self.k());
        self.q.copy_from(&full.columns(0, k));
        self.qperp.copy_from(&full.columns(k, n - k));
    }

    /// `T = Ḋ = DS + SD`
    pub fn vertical_velocity(&self) -> Mat {
        &self.d * &self.s + &self.s * &self.d
    }

    /// Point `[Q, D]`, failing when `D` is no longer positive definite.
    pub fn bundle_point(&self) -> Result<BundlePoint> {
        let frame = Frame::from_parts_unchecked(self.q.clone(), self.qperp.clone());
        BundlePoint::new(frame, SpdMatrix::new(self.d.clone())?)
    }

    /// Velocity `(Q⊥B, DS + SD)`.
    pub fn bundle_tangent(&self) -> Result<BundleTangent> {
        BundleTangent::new(self.b.clone(), SymMatrix::new(self.vertical_velocity())?)
    }

    /// Right O(k) action `(QG, Q⊥, GᵀDG, BG, GᵀSG)`.
    pub fn act(&self, g: &Mat) -> GeodesicState {
        let gt = g.transpose();
        GeodesicState {
            q: &self.q * g,
            qperp: self.qperp.clone(),
            d: symmetrize(&(&gt * &self.d * g)),
            b: &self.b * g,
            s: symmetrize(&(&gt * &self.s * g)),
        }
    }

    fn axpy(&self, h: f64, rate: &GeodesicState) -> GeodesicState {
        GeodesicState {
            q: &self.q + &rate.q * h,
            qperp: &self.qperp + &rate.qperp * h,
            d: &self.d + &rate.d * h,
            b: &self.b + &rate.b * h,
            s: &self.s + &rate.s * h,
        }
    }

    /// Frobenius distance over all five blocks.
    pub fn distance(&self, other: &GeodesicState) -> f64 {
        [
            fro(&(&self.q - &other.q)),
            fro(&(&self.qperp - &other.qperp)),
            fro(&(&self.d - &other.d)),
            fro(&(&self.b - &other.b)),
            fro(&(&self.s - &other.s)),
        ]
        .iter()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
    }
}

fn positivity_threshold(d: &Mat, rank_tol: f64) -> Result<(f64, f64)> {
    let eig = sym_eig(&SymMatrix::new(d.clone())?)?;
    let k = eig.values.len();
    let lmax = eig.values[k - 1];
    Ok((eig.values[0], rank_tol * lmax.abs()))
}

/// Time derivative of the state.
pub fn ode_rhs(state: &GeodesicState, law: HorizontalLaw) -> Result<GeodesicState> {
    let (lmin, threshold) = positivity_threshold(&state.d, RANK_TOL)?;
    if lmin <= threshold {
        return Err(Error::NotPositiveDefinite {
            min_eigenvalue: lmin,
            threshold,
        });
    }
    let ddot = state.vertical_velocity();
    let bdot = match law {
        HorizontalLaw::Quotient => &state.b * &state.s * -2.0,
        HorizontalLaw::AsPrinted => {
            let dinv = sym_eig(&SymMatrix::new(state.d.clone())?)?.map_values(|l| 1.0 / l);
            -(&state.b * dinv * &ddot)
        }
    };
    Ok(GeodesicState {
        q: &state.qperp * &state.b,
        qperp: -(&state.q * state.b.transpose()),
        d: ddot,
        b: bdot,
        s: state.b.transpose() * &state.b - &state.s * &state.s,
    })
}

/// `K = BD`
pub fn momentum(state: &GeodesicState) -> Mat {
    &state.b * &state.d
}

/// `½Tr(BDBᵀ) + ½Tr(SDS)`
pub fn energy(state: &GeodesicState) -> f64 {
    0.5 * (&state.b * &state.d * state.b.transpose()).trace() + 0.5 * (&state.s * &state.d * &state.s).trace()
}

/// `Q(DS − SD)Qᵀ + QDBᵀQ⊥ᵀ − Q⊥BDQᵀ`, i.e. `XẊᵀ − ẊXᵀ` for `X = QD^{1/2}`.
pub fn angular_momentum(state: &GeodesicState) -> Mat {
    let (q, qp) = (&state.q, &state.qperp);
    let comm = &state.d * &state.s - &state.s * &state.d;
    let cross = qp * &state.b * &state.d * q.transpose();
    q * comm * q.transpose() - &cross + cross.transpose()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    pub t_max: f64,
    pub dt: f64,
    /// Polar re-orthogonalization of `[Q Q⊥]` after each step.
    pub reortho: bool,
    pub law: HorizontalLaw,
    /// Breakdown is declared once `λ_min(D) ≤ rank_tol · λ_max(D)`.
    pub rank_tol: f64,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            t_max: 1.0,
            dt: 1e-3,
            reortho: true,
            law: HorizontalLaw::Quotient,
            rank_tol: RANK_TOL,
        }
    }
}

/// Per-sample invariant monitors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monitor {
    pub energy: f64,
    /// `‖B(t)D(t) − B₀D₀‖_F`
    pub momentum_residual: f64,
    /// `‖L(t) − L₀‖_F` for the angular momentum `L`
    pub angular_momentum_residual: f64,
    /// `‖[Q Q⊥]ᵀ[Q Q⊥] − I‖_F` after any correction
    pub orthogonality_residual: f64,
    /// `‖[Q Q⊥]_corrected − [Q Q⊥]‖_F` (zero when re-orthogonalization is off)
    pub reortho_correction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<GeodesicState>,
    pub monitors: Vec<Monitor>,
}

impl Trajectory {
    pub fn initial(&self) -> &GeodesicState {
        &self.states[0]
    }

    pub fn last(&self) -> &GeodesicState {
        self.states.last().expect("trajectory has at least one state")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_energy_drift(&self) -> f64 {
        let e0 = self.monitors[0].energy;
        self.monitors.iter().map(|m| (m.energy - e0).abs()).fold(0.0, f64::max)
    }

    pub fn max_momentum_residual(&self) -> f64 {
        self.monitors.iter().map(|m| m.momentum_residual).fold(0.0, f64::max)
    }

    pub fn max_angular_momentum_residual(&self) -> f64 {
        self.monitors
            .iter()
            .map(|m| m.angular_momentum_residual)
            .fold(0.0, f64::max)
    }

    pub fn max_orthogonality_residual(&self) -> f64 {
        self.monitors
            .iter()
            .map(|m| m.orthogonality_residual)
            .fold(0.0, f64::max)
    }

    pub fn max_reortho_correction(&self) -> f64 {
        self.monitors.iter().map(|m| m.reortho_correction).fold(0.0, f64::max)
    }
}

fn rk4_step(s: &GeodesicState, h: f64, law: HorizontalLaw) -> Result<GeodesicState> {
    let k1 = ode_rhs(s, law)?;
    let k2 = ode_rhs(&s.axpy(h / 2.0, &k1), law)?;
    let k3 = ode_rhs(&s.axpy(h / 2.0, &k2), law)?;
    let k4 = ode_rhs(&s.axpy(h, &k3), law)?;
    let mut next = s.clone();
    for (w, k) in [(1.0, &k1), (2.0, &k2), (2.0, &k3), (1.0, &k4)] {
        next = next.axpy(h * w / 6.0, k);
    }
    next.d = symmetrize(&next.d);
    next.s = symmetrize(&next.s);
    Ok(next)
}

/// Classical fixed-step RK4 from `t = 0` to `t_max`.
///
/// Aborts with [`Error::Breakdown`] as soon as `D` stops being positive definite.
pub fn integrate(s0: &GeodesicState, opts: &IntegrateOptions) -> Result<Trajectory> {
    if !(opts.dt > 0.0 && opts.dt.is_finite()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {}", opts.dt)));
    }
    if !(opts.t_max >= 0.0 && opts.t_max.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "t_max must be nonnegative, got {}",
            opts.t_max
        )));
    }
    let (lmin, threshold) = positivity_threshold(&s0.d, opts.rank_tol)?;
    if lmin <= threshold {
        return Err(Error::Breakdown {
            time: 0.0,
            min_eigenvalue: lmin,
        });
    }
    let steps = ((opts.t_max / opts.dt) - 1e-9).ceil().max(0.0) as usize;
    let k0 = momentum(s0);
    let l0 = angular_momentum(s0);
    let monitor = |s: &GeodesicState, correction: f64| Monitor {
        energy: energy(s),
        momentum_residual: fro(&(momentum(s) - &k0)),
        angular_momentum_residual: fro(&(angular_momentum(s) - &l0)),
        orthogonality_residual: orthonormality_residual(&s.full_frame()),
        reortho_correction: correction,
    };

    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut monitors = Vec::with_capacity(steps + 1);
    times.push(0.0);
    monitors.push(monitor(s0, 0.0));
    states.push(s0.clone());

    let mut current = s0.clone();
    let mut t_prev = 0.0;
    for i in 1..=steps {
        let t = if i == steps { opts.t_max } else { i as f64 * opts.dt };
        let h = t - t_prev;
        let mut next = rk4_step(&current, h, opts.law).map_err(|e| match e {
            Error::NotPositiveDefinite { min_eigenvalue, .. } => Error::Breakdown {
                time: t_prev,
                min_eigenvalue,
            },
            other => other,
        })?;
        let (lmin, threshold) = positivity_threshold(&next.d, opts.rank_tol)?;
        if !lmin.is_finite() || lmin <= threshold {
            return Err(Error::Breakdown {
                time: t,
                min_eigenvalue: lmin,
            });
        }
        let mut correction = 0.0;
        if opts.reortho {
            let full = next.full_frame();
            let polar = polar_factor(&full)?;
            correction = fro(&(&polar - &full));
            next.set_full_frame(&polar);
        }
        monitors.push(monitor(&next, correction));
        times.push(t);
        states.push(next.clone());
        current = next;
        t_prev = t;
    }
    Ok(Trajectory {
        times,
        states,
        monitors,
    })
}

/// Admissible open interval of `t` for which `I + tS₀` is invertible around 0.
pub fn vertical_domain(s0: &SymMatrix) -> Result<(f64, f64)> {
    let eig = sym_eig(s0)?;
    let k = eig.values.len();
    let (lmin, lmax) = (eig.values[0], eig.values[k - 1]);
    let upper = if lmin < 0.0 { -1.0 / lmin } else { f64::INFINITY };
    let lower = if lmax > 0.0 { -1.0 / lmax } else { f64::NEG_INFINITY };
    Ok((lower, upper))
}

/// Closed-form fiber geodesic `(I + tS₀) D₀ (I + tS₀)`.
pub fn vertical_geodesic(d0: &SpdMatrix, s0: &SymMatrix, t: f64) -> Result<SpdMatrix> {
    if d0.dim() != s0.dim() {
        return Err(dim_mismatch("vertical_geodesic", d0.dim(), s0.dim()));
    }
    let (lower, upper) = vertical_domain(s0)?;
    if t >= upper {
        return Err(Error::DomainExceeded { t, t_max: upper });
    }
    if t <= lower {
        return Err(Error::DomainExceeded { t, t_max: lower });
    }
    let k = d0.dim();
    let m = Mat::identity(k, k) + s0.as_mat() * t;
    SpdMatrix::new(&m * d0.as_mat() * &m)
}

/// Closed-form rank-one geodesic at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOnePoint {
    pub q: Mat,
    pub qperp: Mat,
    pub d: f64,
    /// Horizontal velocity in the moving frame `Q⊥(t)`.
    pub b: Mat,
    pub s: f64,
    /// Rotation angle `arctan r(t) − arctan r₀`.
    pub theta: f64,
}

impl RankOnePoint {
    pub fn to_state(&self) -> GeodesicState {
        GeodesicState {
            q: self.q.clone(),
            qperp: self.qperp.clone(),
            d: Mat::from_element(1, 1, self.d),
            b: self.b.clone(),
            s: Mat::from_element(1, 1, self.s),
        }
    }
}

/// Closed-form geodesic for k = 1 with nonzero horizontal velocity.
///
/// With `r₀ = s₀/‖b₀‖`, `C̃ = ‖b₀‖(1 + r₀²)` and `r(t) = r₀ + C̃t`:
/// `d = d₀(1 + r²)/(1 + r₀²)`, `b = b₀(1 + r₀²)/(1 + r²)`, `s = ‖b‖r`, and
/// `[q Q⊥]` rotates by `exp(θ b̂)` in the plane of `q₀` and `w₀ = Q⊥(0)b̂`.
pub fn k1_geodesic(frame: &Frame, d0: f64, b0: &Mat, s0: f64, t: f64) -> Result<RankOnePoint> {
    let n = frame.n();
    if frame.k() != 1 || b0.shape() != (n - 1, 1) {
        return Err(dim_mismatch(
            "k1_geodesic",
            format!("k = 1, b0 {}x1", n - 1),
            format!("k = {}", frame.k()),
        ));
    }
    if d0 <= 0.0 {
        return Err(Error::InvalidArgument(format!("d0 must be positive, got {d0}")));
    }
    let nb0 = b0.norm();
    if nb0 == 0.0 {
        return Err(Error::ZeroHorizontalVelocity);
    }
    let r0 = s0 / nb0;
    let c = nb0 * (1.0 + r0 * r0);
    let r = r0 + c * t;
    let theta = r.atan() - r0.atan();
    let bhat = b0 / nb0;
    let q0 = frame.q().as_mat();
    let qp0 = frame.qperp();
    let w0 = qp0 * &bhat;
    let (sn, cs) = theta.sin_cos();
    let q = q0 * cs + &w0 * sn;
    let eye = Mat::identity(n - 1, n - 1);
    let qperp = qp0 * (eye - &bhat * bhat.transpose() * (1.0 - cs)) - q0 * bhat.transpose() * sn;
    let scale = (1.0 + r0 * r0) / (1.0 + r * r);
    let b = b0 * scale;
    Ok(RankOnePoint {
        q,
        qperp,
        d: d0 / scale,
        s: nb0 * scale * r,
        b,
        theta,
    })
}

/// `Σ(t) = Q(t)D(t)Q(t)ᵀ` along a trajectory.
pub fn pullback_curve(traj: &Trajectory) -> Result<Vec<PsdFixedRank>> {
    traj.states
        .iter()
        .map(|s| PsdFixedRank::from_factor(StiefelPoint::new_unchecked(s.q.clone()), SpdMatrix::new(s.d.clone())?))
        .collect()
}

const LIFT_TOL: f64 = 1e-8;

/// Horizontal lift of `V ∈ T_Σ` to `X₀ = QD^{1/2}`: the `H` with
/// `HX₀ᵀ + X₀Hᵀ = V` and `X₀ᵀH` symmetric, by least squares over vec(H).
pub fn horizontal_lift(p: &BundlePoint, v: &AmbientTangent) -> Result<Mat> {
    let x0 = p.q() * p.d.sqrt().as_mat();
    let v = v.as_mat();
    let (n, k) = x0.shape();
    if v.shape() != (n, n) {
        return Err(dim_mismatch(
            "horizontal_lift",
            format!("{n}x{n}"),
            format!("{}x{}", v.nrows(), v.ncols()),
        ));
    }
    let rows = n * n + k * k;
    let apply = |h: &Mat| -> (Mat, Mat) {
        let sym = h * x0.transpose() + &x0 * h.transpose();
        let xh = x0.transpose() * h;
        let skew = &xh - xh.transpose();
        (sym, skew)
    };
    let mut system = Mat::zeros(rows, n * k);
    for col in 0..n * k {
        let mut e = Mat::zeros(n, k);
        e[col] = 1.0;
        let (sym, skew) = apply(&e);
        for (i, x) in sym.iter().enumerate() {
            system[(i, col)] = *x;
        }
        for (i, x) in skew.iter().enumerate() {
            system[(n * n + i, col)] = *x;
        }
    }
    let mut rhs = nalgebra::DVector::zeros(rows);
    for (i, x) in v.iter().enumerate() {
        rhs[i] = *x;
    }
    let svd = nalgebra::SVD::new(system, true, true);
    let sol = svd
        .solve(&rhs, 1e-13 * svd.singular_values.max())
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let h = Mat::from_column_slice(n, k, sol.as_slice());
    let (sym, skew) = apply(&h);
    let residual = fro(&(sym - v)) + fro(&skew);
    if residual > LIFT_TOL * (1.0 + fro(v)) {
        return Err(Error::LiftResidual { residual });
    }
    Ok(h)
}

/// `(X₀ + tH)(X₀ + tH)ᵀ`, the projected straight line.
pub fn quotient_line_oracle(x0: &Mat, h: &Mat, t: f64) -> Result<PsdFixedRank> {
    PsdFixedRank::from_full_rank_factor(&(x0 + h * t))
}

/// `(X₀, H)` for the quotient line matching a geodesic initial state.
pub fn quotient_initial_data(state: &GeodesicState) -> Result<(Mat, Mat)> {
    let p = state.bundle_point()?;
    let v = dphi(&p, &state.bundle_tangent()?);
    let h = horizontal_lift(&p, &v)?;
    Ok((p.q() * p.d.sqrt().as_mat(), h))
}
