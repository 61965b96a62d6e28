//! Built-in initial data for the worked examples and their closed forms.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geodesics::{energy, integrate, k1_geodesic, GeodesicState, IntegrateOptions, Trajectory};
use crate::manifolds::Frame;
use crate::matkernels::{fro, random_orthogonal, symmetrize, DetSign, Mat, SpdMatrix, SymMatrix};
use crate::verify::PropertyReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PresetId {
    /// n = 2, k = 1.
    Ex1N2K1,
    /// n = 4, k = 1.
    Ex2NK1,
    /// n = 5, k = 3, diagonal data.
    Ex3A,
    /// n = 5, k = 3, coupled data without a closed form.
    Ex3B,
}

impl PresetId {
    pub const ALL: [PresetId; 4] = [PresetId::Ex1N2K1, PresetId::Ex2NK1, PresetId::Ex3A, PresetId::Ex3B];

    pub fn as_str(self) -> &'static str {
        match self {
            PresetId::Ex1N2K1 => "ex1-n2k1",
            PresetId::Ex2NK1 => "ex2-nk1",
            PresetId::Ex3A => "ex3-a",
            PresetId::Ex3B => "ex3-b",
        }
    }

    pub fn has_closed_form(self) -> bool {
        self != PresetId::Ex3B
    }
}

impl fmt::Display for PresetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PresetId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PresetId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown example id `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub id: PresetId,
    pub frame: Frame,
    pub d0: SpdMatrix,
    pub b0: Mat,
    pub s0: SymMatrix,
    pub opts: IntegrateOptions,
}

impl Preset {
    pub fn initial_state(&self) -> GeodesicState {
        GeodesicState::new(&self.frame, &self.d0, self.b0.clone(), &self.s0).expect("preset data is consistent")
    }

    pub fn integrate(&self) -> Result<Trajectory> {
        integrate(&self.initial_state(), &self.opts)
    }

    /// Closed-form state at time `t`, when one is known.
    pub fn closed_form(&self, t: f64) -> Option<Result<GeodesicState>> {
        match self.id {
            PresetId::Ex1N2K1 | PresetId::Ex2NK1 => Some(
                k1_geodesic(
                    &self.frame,
                    self.d0.as_mat()[(0, 0)],
                    &self.b0,
                    self.s0.as_mat()[(0, 0)],
                    t,
                )
                .map(|p| p.to_state()),
            ),
            PresetId::Ex3A => Some(Ok(ex3a_state(t))),
            PresetId::Ex3B => None,
        }
    }
}

pub const EX1_THETA0: f64 = 0.3;

pub fn preset(id: PresetId) -> Preset {
    let opts = IntegrateOptions::default();
    match id {
        PresetId::Ex1N2K1 => {
            let (s, c) = EX1_THETA0.sin_cos();
            let full = Mat::from_row_slice(2, 2, &[c, -s, s, c]);
            Preset {
                id,
                frame: Frame::from_full(&full, 1).expect("rotation"),
                d0: SpdMatrix::from_diagonal(&[1.5]).expect("positive"),
                b0: Mat::from_element(1, 1, 0.8),
                s0: SymMatrix::from_diagonal(&[0.25]),
                opts,
            }
        }
        PresetId::Ex2NK1 => Preset {
            id,
            frame: Frame::from_full(&random_orthogonal(4, 7, DetSign::Plus), 1).expect("orthogonal"),
            d0: SpdMatrix::from_diagonal(&[2.0]).expect("positive"),
            b0: Mat::from_column_slice(3, 1, &[0.6, -0.3, 0.2]),
            s0: SymMatrix::from_diagonal(&[-0.1]),
            opts,
        },
        PresetId::Ex3A => Preset {
            id,
            frame: Frame::identity(5, 3),
            d0: SpdMatrix::identity(3),
            b0: Mat::from_row_slice(2, 3, &[0.5, 0.0, 0.0, 0.0, 0.5, 0.0]),
            s0: SymMatrix::from_diagonal(&[0.25, 0.25, 0.25]),
            opts,
        },
        PresetId::Ex3B => {
            let t0 = Mat::from_row_slice(3, 3, &[0.3, -0.7, 0.4, 1.0, -0.5, 0.2, -1.0, 1.0, 0.0]) * 0.5;
            // D₀ = I, so S₀ = T₀/2 after symmetrizing the printed T₀
            let s0 = SymMatrix::new(symmetrize(&t0) * 0.5).expect("finite");
            Preset {
                id,
                frame: Frame::identity(5, 3),
                d0: SpdMatrix::identity(3),
                b0: Mat::from_row_slice(2, 3, &[1.0, 0.5, -0.4, -0.6, 1.0, 0.0]) * 0.5,
                s0,
                opts,
            }
        }
    }
}

/// `r(t) = 1/2 + 5t/8` for the diagonal n = 5, k = 3 example.
pub fn ex3a_r(t: f64) -> f64 {
    0.5 + 0.625 * t
}

pub fn ex3a_theta(t: f64) -> f64 {
    ex3a_r(t).atan() - 0.5f64.atan()
}

/// `(d_i, b_i, s_i)` for i = 1, 2.
pub fn ex3a_coupled(t: f64) -> (f64, f64, f64) {
    let r = ex3a_r(t);
    let w = 1.0 + r * r;
    (0.8 * w, 5.0 / (8.0 * w), 5.0 * r / (8.0 * w))
}

/// `(d₃, s₃)`.
pub fn ex3a_vertical(t: f64) -> (f64, f64) {
    let a = 1.0 + 0.25 * t;
    (a * a, 0.25 / a)
}

/// Full closed-form state; `[Q Q⊥]` rotates in the (e₁,e₄) and (e₂,e₅) planes.
pub fn ex3a_state(t: f64) -> GeodesicState {
    let (sn, cs) = ex3a_theta(t).sin_cos();
    let mut full = Mat::identity(5, 5);
    for (i, j) in [(0, 3), (1, 4)] {
        full[(i, i)] = cs;
        full[(j, j)] = cs;
        full[(j, i)] = sn;
        full[(i, j)] = -sn;
    }
    let (d, b, s) = ex3a_coupled(t);
    let (d3, s3) = ex3a_vertical(t);
    GeodesicState {
        q: full.columns(0, 3).into_owned(),
        qperp: full.columns(3, 2).into_owned(),
        d: Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![d, d, d3])),
        b: Mat::from_row_slice(2, 3, &[b, 0.0, 0.0, 0.0, b, 0.0]),
        s: Mat::from_diagonal(&nalgebra::DVector::from_vec(vec![s, s, s3])),
    }
}

/// `Σ(t) = d₀(q₀ + t(s₀q₀ + Q⊥₀b₀))(…)ᵀ` for k = 1.
pub fn rank_one_sigma(frame: &Frame, d0: f64, b0: &Mat, s0: f64, t: f64) -> Mat {
    let q0 = frame.q().as_mat();
    let x = (q0 + (q0 * s0 + frame.qperp() * b0) * t) * d0.sqrt();
    &x * x.transpose()
}

/// Sup over samples of the entrywise distance to the closed form.
pub fn closed_form_error(p: &Preset, traj: &Trajectory) -> Option<Result<f64>> {
    if !p.id.has_closed_form() {
        return None;
    }
    let mut worst = 0.0f64;
    for (t, s) in traj.times.iter().zip(&traj.states) {
        let exact = match p.closed_form(*t)? {
            Ok(e) => e,
            Err(e) => return Some(Err(e)),
        };
        worst = worst.max(s.distance(&exact));
    }
    Some(Ok(worst))
}

pub const CLOSED_FORM_TOL: f64 = 1e-6;
pub const MONITOR_TOL: f64 = 1e-7;
pub const ORTHO_TOL: f64 = 1e-8;

/// The checks `reproduce` asserts for a preset.
pub fn reproduce_checks(p: &Preset, traj: &Trajectory) -> Result<Vec<PropertyReport>> {
    let mut out = Vec::new();
    if let Some(err) = closed_form_error(p, traj) {
        out.push(PropertyReport::new("closed form (sup-norm)", err?, CLOSED_FORM_TOL));
    }
    if p.id == PresetId::Ex1N2K1 {
        let (d0, s0) = (p.d0.as_mat()[(0, 0)], p.s0.as_mat()[(0, 0)]);
        let worst = traj
            .times
            .iter()
            .zip(&traj.states)
            .map(|(t, s)| {
                let sigma = &s.q * &s.d * s.q.transpose();
                fro(&(sigma - rank_one_sigma(&p.frame, d0, &p.b0, s0, *t)))
            })
            .fold(0.0, f64::max);
        out.push(PropertyReport::new("quadratic Sigma(t)", worst, CLOSED_FORM_TOL));
    }
    let e0 = energy(traj.initial());
    out.push(PropertyReport::new(
        "energy drift (relative)",
        traj.max_energy_drift() / e0.abs().max(f64::MIN_POSITIVE),
        MONITOR_TOL,
    ));
    if p.id != PresetId::Ex3B {
        let scale = fro(&crate::geodesics::momentum(traj.initial())).max(1.0);
        out.push(PropertyReport::new(
            "momentum BD (relative)",
            traj.max_momentum_residual() / scale,
            MONITOR_TOL,
        ));
    }
    let scale = fro(&crate::geodesics::angular_momentum(traj.initial())).max(1.0);
    out.push(PropertyReport::new(
        "angular momentum (relative)",
        traj.max_angular_momentum_residual() / scale,
        MONITOR_TOL,
    ));
    out.push(PropertyReport::new(
        "frame orthogonality",
        traj.max_orthogonality_residual(),
        ORTHO_TOL,
    ));
    Ok(out)
}
