//! JSON run configuration for `geodesic`.
//!
//! ```json
//! {
//!   "n": 5, "k": 3,
//!   "Q0": "identity-frame",
//!   "D0": [[1,0,0],[0,1,0],[0,0,1]],
//!   "B0": [[0.5,0,0],[0,0.5,0]],
//!   "T0": [[0.5,0,0],[0,0.5,0],[0,0,0.5]],
//!   "t_max": 1.0, "dt": 0.001,
//!   "outputs": [{"csv": "ex3.csv"}, {"svg": "ex3-d.svg", "entries": ["D[0][0]", "D[2][2]"]}]
//! }
//! ```
//!
//! `Q0` is `"identity-frame"`, `"random-frame"` (drawn from `seed`), an n×k
//! basis completed deterministically, or a full n×n orthogonal frame whose
//! last n − k columns are used as `Q⊥`.

use std::path::{Path, PathBuf};

use bwrank::geodesics::{GeodesicState, HorizontalLaw, IntegrateOptions};
use bwrank::manifolds::{Frame, StiefelPoint};
use bwrank::matkernels::{fro, random_orthogonal, sylvester_solve, DetSign, Mat, SpdMatrix, SymMatrix};
use bwrank::tolerance::{ANGLE_TOL, RANK_TOL};
use serde::Deserialize;

use crate::matio::from_rows;
use crate::{seed_from_env, CliError, CliResult};

const SYM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum FrameSpec {
    Named(String),
    Values(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LawSpec {
    #[default]
    Quotient,
    AsPrinted,
}

impl From<LawSpec> for HorizontalLaw {
    fn from(l: LawSpec) -> Self {
        match l {
            LawSpec::Quotient => HorizontalLaw::Quotient,
            LawSpec::AsPrinted => HorizontalLaw::AsPrinted,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputTarget {
    pub csv: Option<String>,
    pub svg: Option<String>,
    /// Entry names such as `D[0][0]`; defaults to every entry that changes.
    pub entries: Option<Vec<String>>,
}

fn default_t_max() -> f64 {
    1.0
}
fn default_dt() -> f64 {
    1e-3
}
fn default_true() -> bool {
    true
}
fn default_rank_tol() -> f64 {
    RANK_TOL
}
fn default_angle_tol() -> f64 {
    ANGLE_TOL
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: usize,
    pub k: usize,
    #[serde(rename = "Q0")]
    pub q0: FrameSpec,
    #[serde(rename = "D0")]
    pub d0: Vec<Vec<f64>>,
    #[serde(rename = "B0")]
    pub b0: Vec<Vec<f64>>,
    #[serde(rename = "T0", default)]
    pub t0: Option<Vec<Vec<f64>>>,
    #[serde(rename = "S0", default)]
    pub s0: Option<Vec<Vec<f64>>>,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_true")]
    pub reortho: bool,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_rank_tol")]
    pub rank_tol: f64,
    #[serde(default = "default_angle_tol")]
    pub angle_tol: f64,
    #[serde(default)]
    pub law: LawSpec,
    #[serde(default)]
    pub outputs: Vec<OutputTarget>,
}

/// A validated configuration with resolved output paths.
#[derive(Debug, Clone, PartialEq)]
pub struct Run {
    pub initial: GeodesicState,
    pub opts: IntegrateOptions,
    pub seed: u64,
    pub outputs: Vec<ResolvedOutput>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ResolvedOutput {
    Csv(PathBuf),
    Svg {
        path: PathBuf,
        entries: Option<Vec<String>>,
    },
}

fn matrix(name: &str, rows: &[Vec<f64>], shape: (usize, usize)) -> CliResult<Mat> {
    let m = from_rows(rows).map_err(|e| CliError::usage(format!("{name}: {}", e.message)))?;
    // an empty row list stands for any 0-row matrix
    let m = if rows.is_empty() { Mat::zeros(0, shape.1) } else { m };
    if m.shape() != shape {
        return Err(CliError::usage(format!(
            "{name} must be {}x{}, got {}x{}",
            shape.0,
            shape.1,
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(m)
}

fn symmetric(name: &str, m: Mat) -> CliResult<SymMatrix> {
    let asym = fro(&(&m - m.transpose()));
    if asym > SYM_TOL * fro(&m).max(1.0) {
        return Err(CliError::usage(format!(
            "{name} must be symmetric (asymmetry {asym:.3e})"
        )));
    }
    SymMatrix::new(m).map_err(|e| CliError::usage(format!("{name}: {e}")))
}

impl RunConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).map_err(|e| CliError::usage(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    fn frame(&self, seed: u64) -> CliResult<Frame> {
        let (n, k) = (self.n, self.k);
        match &self.q0 {
            FrameSpec::Named(s) if s == "identity-frame" => Ok(Frame::identity(n, k)),
            FrameSpec::Named(s) if s == "random-frame" => {
                Frame::from_full(&random_orthogonal(n, seed, DetSign::Plus), k)
                    .map_err(|e| CliError::usage(e.to_string()))
            }
            FrameSpec::Named(s) => Err(CliError::usage(format!(
                "Q0: expected \"identity-frame\", \"random-frame\" or a matrix, got \"{s}\""
            ))),
            FrameSpec::Values(rows) => {
                let m = from_rows(rows).map_err(|e| CliError::usage(format!("Q0: {}", e.message)))?;
                if m.shape() == (n, n) {
                    Frame::from_full(&m, k).map_err(|e| CliError::usage(format!("Q0: {e}")))
                } else if m.shape() == (n, k) {
                    let q = StiefelPoint::new(m).map_err(|e| CliError::usage(format!("Q0: {e}")))?;
                    Ok(Frame::complete(q))
                } else {
                    Err(CliError::usage(format!(
                        "Q0 must be {n}x{k} or {n}x{n}, got {}x{}",
                        m.nrows(),
                        m.ncols()
                    )))
                }
            }
        }
    }

    /// Validates dimensions and values; `base` anchors relative output paths.
    pub fn resolve(&self, base: &Path, default_stem: &str) -> CliResult<Run> {
        let (n, k) = (self.n, self.k);
        if k == 0 || k >= n {
            return Err(CliError::usage(format!("need 0 < k < n, got n = {n}, k = {k}")));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) || !(self.t_max >= 0.0 && self.t_max.is_finite()) {
            return Err(CliError::usage("dt must be positive and t_max nonnegative"));
        }
        if !(self.rank_tol > 0.0 && self.angle_tol > 0.0) {
            return Err(CliError::usage("rank_tol and angle_tol must be positive"));
        }
        let seed = seed_from_env(self.seed)?;
        let frame = self.frame(seed)?;
        let d0 = symmetric("D0", matrix("D0", &self.d0, (k, k))?)?;
        let d0 = SpdMatrix::from_sym(d0).map_err(|e| CliError::usage(format!("D0: {e}")))?;
        let b0 = matrix("B0", &self.b0, (n - k, k))?;
        let s0 = match (&self.t0, &self.s0) {
            (Some(t), None) => {
                let t = symmetric("T0", matrix("T0", t, (k, k))?)?;
                sylvester_solve(&d0, &t).map_err(|e| CliError::usage(format!("T0: {e}")))?
            }
            (None, Some(s)) => symmetric("S0", matrix("S0", s, (k, k))?)?,
            _ => return Err(CliError::usage("exactly one of T0 and S0 must be given")),
        };
        let initial = GeodesicState::new(&frame, &d0, b0, &s0).map_err(|e| CliError::usage(e.to_string()))?;
        let opts = IntegrateOptions {
            t_max: self.t_max,
            dt: self.dt,
            reortho: self.reortho,
            law: self.law.into(),
            rank_tol: self.rank_tol,
        };
        let mut outputs = Vec::new();
        for o in &self.outputs {
            if o.csv.is_none() && o.svg.is_none() {
                return Err(CliError::usage("each output needs a csv or svg path"));
            }
            if let Some(c) = &o.csv {
                outputs.push(ResolvedOutput::Csv(base.join(c)));
            }
            if let Some(s) = &o.svg {
                outputs.push(ResolvedOutput::Svg {
                    path: base.join(s),
                    entries: o.entries.clone(),
                });
            }
        }
        if !outputs.iter().any(|o| matches!(o, ResolvedOutput::Csv(_))) {
            outputs.insert(0, ResolvedOutput::Csv(base.join(format!("{default_stem}.csv"))));
        }
        Ok(Run {
            initial,
            opts,
            seed,
            outputs,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EX3: &str = r#"{
        "n": 5, "k": 3, "Q0": "identity-frame",
        "D0": [[1,0,0],[0,1,0],[0,0,1]],
        "B0": [[0.5,0,0],[0,0.5,0]],
        "T0": [[0.5,0,0],[0,0.5,0],[0,0,0.5]]
    }"#;

    #[test]
    fn t0_is_converted() {
        let run = RunConfig::parse(EX3).unwrap().resolve(Path::new("."), "run").unwrap();
        assert_eq!(run.initial.s, Mat::identity(3, 3) * 0.25);
        assert_eq!(run.opts.dt, 1e-3);
        assert_eq!(run.outputs, vec![ResolvedOutput::Csv(PathBuf::from("./run.csv"))]);
    }

    #[test]
    fn rejects_both_or_neither_velocity() {
        let both = EX3.replace("\"T0\"", "\"S0\": [[0,0,0],[0,0,0],[0,0,0]], \"T0\"");
        let cfg = RunConfig::parse(&both).unwrap();
        assert!(cfg.resolve(Path::new("."), "x").is_err());
        let neither = r#"{"n": 2, "k": 1, "Q0": "identity-frame", "D0": [[1]], "B0": [[1]]}"#;
        assert!(RunConfig::parse(neither).unwrap().resolve(Path::new("."), "x").is_err());
    }

    #[test]
    fn rejects_bad_values() {
        let nonsym = EX3.replace("[[0.5,0,0],[0,0.5,0],[0,0,0.5]]", "[[0.5,1,0],[0,0.5,0],[0,0,0.5]]");
        assert!(RunConfig::parse(&nonsym).unwrap().resolve(Path::new("."), "x").is_err());
        let notspd = EX3.replace(
            "\"D0\": [[1,0,0],[0,1,0],[0,0,1]]",
            "\"D0\": [[1,0,0],[0,-1,0],[0,0,1]]",
        );
        assert!(RunConfig::parse(&notspd).unwrap().resolve(Path::new("."), "x").is_err());
        assert!(RunConfig::parse("{\"n\": 5}").is_err());
        assert!(RunConfig::parse(&EX3.replace("\"k\": 3", "\"k\": 3, \"typo\": 1")).is_err());
    }

    #[test]
    fn frame_variants() {
        let full = EX3.replace(
            "\"identity-frame\"",
            "[[0,1,0,0,0],[1,0,0,0,0],[0,0,1,0,0],[0,0,0,1,0],[0,0,0,0,1]]",
        );
        let run = RunConfig::parse(&full).unwrap().resolve(Path::new("."), "x").unwrap();
        assert_eq!(run.initial.q[(1, 0)], 1.0);
        let basis = EX3.replace("\"identity-frame\"", "[[1,0,0],[0,1,0],[0,0,1],[0,0,0],[0,0,0]]");
        let run = RunConfig::parse(&basis).unwrap().resolve(Path::new("."), "x").unwrap();
        assert_eq!(run.initial.full_frame(), Mat::identity(5, 5));
        let bad = EX3.replace("\"identity-frame\"", "\"eye\"");
        assert!(RunConfig::parse(&bad).unwrap().resolve(Path::new("."), "x").is_err());
    }
}
