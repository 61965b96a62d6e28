use std::io::Write;
use std::path::Path;

use bwrank::bwgeom::{bw_distance, bw_distance_factors};
use bwrank::geodesics::{angular_momentum, integrate, momentum, Trajectory};
use bwrank::logmaps::{log_index_params, sample_log_family};
use bwrank::matkernels::{fro, sym_eig, Mat, SymMatrix};
use bwrank::presets::{preset, reproduce_checks, PresetId};
use bwrank::tolerance::Tolerances;
use bwrank::verify::{all_passed, run_verify, VerifyConfig};
use bwrank::Error;

use crate::config::{ResolvedOutput, RunConfig};
use crate::matio::read_matrix;
use crate::output::{
    changing_entries, monitors_csv, monitors_path, select_entries, series, svg_plot, trajectory_csv, write_file,
};
use crate::{exit, seed_from_env, CliError, CliResult};

/// Largest formula/Procrustes disagreement `distance` tolerates.
pub const DISTANCE_AGREEMENT: f64 = 1e-6;
const CHANGE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

fn integration_error(e: Error) -> CliError {
    match e {
        Error::Breakdown { time, min_eigenvalue } => CliError::new(
            exit::BREAKDOWN,
            format!("integration breakdown at t = {time}: D lost positive definiteness (min eigenvalue {min_eigenvalue:.3e})"),
        ),
        other => CliError::usage(other.to_string()),
    }
}

fn summarize(traj: &Trajectory, out: &mut dyn Write) -> CliResult<()> {
    let s0 = traj.initial();
    writeln!(out, "steps            {}", traj.len() - 1)?;
    writeln!(out, "t_end            {}", traj.times.last().copied().unwrap_or(0.0))?;
    writeln!(out, "energy           {}", traj.monitors[0].energy)?;
    writeln!(out, "max energy drift {:.3e}", traj.max_energy_drift())?;
    writeln!(
        out,
        "max |BD - K|     {:.3e} (|K| = {:.3e})",
        traj.max_momentum_residual(),
        fro(&momentum(s0))
    )?;
    writeln!(
        out,
        "max |L - L0|     {:.3e} (|L0| = {:.3e})",
        traj.max_angular_momentum_residual(),
        fro(&angular_momentum(s0))
    )?;
    writeln!(out, "max orth resid   {:.3e}", traj.max_orthogonality_residual())?;
    Ok(())
}

fn write_csvs(traj: &Trajectory, csv: &Path, out: &mut dyn Write) -> CliResult<()> {
    write_file(csv, &trajectory_csv(traj))?;
    let mon = monitors_path(csv);
    write_file(&mon, &monitors_csv(traj))?;
    writeln!(out, "wrote {}", csv.display())?;
    writeln!(out, "wrote {}", mon.display())?;
    Ok(())
}

/// `geodesic <config>`
pub fn cmd_geodesic(config: &Path, out: &mut dyn Write) -> CliResult<()> {
    let cfg = RunConfig::load(config)?;
    let base = config.parent().unwrap_or(Path::new("."));
    let stem = config
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    let run = cfg.resolve(base, &stem)?;
    let traj = integrate(&run.initial, &run.opts).map_err(integration_error)?;
    for o in &run.outputs {
        match o {
            ResolvedOutput::Csv(path) => write_csvs(&traj, path, out)?,
            ResolvedOutput::Svg { path, entries } => {
                let idx = match entries {
                    Some(names) => select_entries(&traj, names)?,
                    None => changing_entries(&traj, CHANGE_TOL),
                };
                write_file(path, &svg_plot(&stem, &traj.times, &series(&traj, &idx)))?;
                writeln!(out, "wrote {}", path.display())?;
            }
        }
    }
    summarize(&traj, out)
}

fn check_psd(name: &str, m: &Mat) -> CliResult<SymMatrix> {
    if !m.is_square() {
        return Err(CliError::usage(format!(
            "{name}: matrix must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    let asym = fro(&(m - m.transpose()));
    if asym > PSD_TOL * fro(m).max(1.0) {
        return Err(CliError::new(
            exit::NOT_PSD,
            format!("{name}: not symmetric (asymmetry {asym:.3e})"),
        ));
    }
    let s = SymMatrix::new(m.clone()).map_err(|e| CliError::usage(format!("{name}: {e}")))?;
    let eig = sym_eig(&s).map_err(|e| CliError::usage(format!("{name}: {e}")))?;
    let lmax = eig.values.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let lmin = eig.values.iter().copied().fold(f64::INFINITY, f64::min);
    if lmin < -PSD_TOL * lmax {
        return Err(CliError::new(
            exit::NOT_PSD,
            format!("{name}: not positive semidefinite (eigenvalue {lmin:.3e})"),
        ));
    }
    Ok(s)
}

/// `X = V_+ Λ_+^{1/2}` over eigenvalues above `rank_tol · λ_max`.
fn psd_factor(s: &SymMatrix, rank_tol: f64) -> CliResult<Mat> {
    let eig = sym_eig(s).map_err(|e| CliError::usage(e.to_string()))?;
    let lmax = eig.values.iter().fold(0.0f64, |a, v| a.max(*v));
    let keep: Vec<usize> = (0..eig.values.len())
        .filter(|&i| eig.values[i] > rank_tol * lmax && lmax > 0.0)
        .collect();
    let mut x = Mat::zeros(s.dim(), keep.len());
    for (c, &i) in keep.iter().enumerate() {
        x.set_column(c, &(eig.vectors.column(i) * eig.values[i].sqrt()));
    }
    Ok(x)
}

/// `distance <A> <B>`
pub fn cmd_distance(a: &Path, b: &Path, rank_tol: f64, out: &mut dyn Write) -> CliResult<()> {
    let ma = read_matrix(a)?;
    let mb = read_matrix(b)?;
    let sa = check_psd("A", &ma)?;
    let sb = check_psd("B", &mb)?;
    if sa.dim() != sb.dim() {
        return Err(CliError::usage(format!(
            "A is {0}x{0} but B is {1}x{1}",
            sa.dim(),
            sb.dim()
        )));
    }
    let formula = bw_distance(sa.as_mat(), sb.as_mat()).map_err(|e| CliError::new(exit::NOT_PSD, e.to_string()))?;
    let (xa, xb) = (psd_factor(&sa, rank_tol)?, psd_factor(&sb, rank_tol)?);
    let procrustes = bw_distance_factors(&xa, &xb).map_err(|e| CliError::usage(e.to_string()))?;
    let diff = (formula - procrustes).abs();
    writeln!(out, "rank(A)     {}", xa.ncols())?;
    writeln!(out, "rank(B)     {}", xb.ncols())?;
    writeln!(out, "formula     {formula}")?;
    writeln!(out, "procrustes  {procrustes}")?;
    writeln!(out, "difference  {diff:.3e}")?;
    if diff.is_nan() || diff > DISTANCE_AGREEMENT {
        return Err(CliError::new(
            exit::DISTANCE_DISAGREEMENT,
            format!("formula and Procrustes distances disagree by {diff:.3e} (> {DISTANCE_AGREEMENT:e})"),
        ));
    }
    Ok(())
}

/// `logcount <X> <Y> --samples N`
pub fn cmd_logcount(
    x: &Path,
    y: &Path,
    samples: usize,
    seed: u64,
    tol: Tolerances,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult<()> {
    let mx = read_matrix(x)?;
    let my = read_matrix(y)?;
    let p = log_index_params(&mx, &my, &tol).map_err(|e| match e {
        Error::CountMismatch { .. } | Error::CertificateFailure { .. } => {
            CliError::new(exit::CERTIFICATE, e.to_string())
        }
        other => CliError::usage(other.to_string()),
    })?;
    if p.borderline > 0 {
        writeln!(
            err,
            "warning: {} principal angle(s) within 10x of the orthogonality threshold {:e}",
            p.borderline, tol.angle_tol
        )?;
    }
    let q1 = bwrank::manifolds::StiefelPoint::from_span(&mx).map_err(|e| CliError::usage(e.to_string()))?;
    let q2 = bwrank::manifolds::StiefelPoint::from_span(&my).map_err(|e| CliError::usage(e.to_string()))?;
    let angles = bwrank::manifolds::principal_angles(&q1, &q2).map_err(|e| CliError::usage(e.to_string()))?;
    let seeds: Vec<u64> = (0..samples as u64).map(|i| seed.wrapping_add(i)).collect();
    let family = sample_log_family(&p, &seeds).map_err(|e| CliError::new(exit::CERTIFICATE, e.to_string()))?;
    let worst = family.iter().map(|c| c.residual).fold(0.0, f64::max);
    let formatted: Vec<String> = angles.angles.iter().map(|a| format!("{a:.9}")).collect();
    writeln!(out, "k                 {}", p.k())?;
    writeln!(out, "l                 {}", p.l)?;
    writeln!(out, "r                 {}", p.r)?;
    writeln!(out, "principal angles  {}", formatted.join(" "))?;
    writeln!(out, "certified samples {}", family.len())?;
    writeln!(out, "max certificate   {worst:.3e}")?;
    let verdict = match p.r {
        0 => "unique".to_string(),
        1 => "O(1)-family (two branches)".to_string(),
        r => format!("O({r})-family"),
    };
    writeln!(out, "verdict           {verdict}")?;
    Ok(())
}

/// `reproduce <id>`
pub fn cmd_reproduce(id: &str, out_dir: &Path, out: &mut dyn Write) -> CliResult<()> {
    let id: PresetId = id.parse().map_err(|e: Error| CliError::usage(e.to_string()))?;
    let p = preset(id);
    let traj = p.integrate().map_err(integration_error)?;
    write_csvs(&traj, &out_dir.join(format!("{id}.csv")), out)?;
    let names = crate::output::entry_names(traj.initial());
    let moving = changing_entries(&traj, CHANGE_TOL);
    for block in ["Q", "D", "B", "S"] {
        let idx: Vec<usize> = moving
            .iter()
            .copied()
            .filter(|&i| names[i].starts_with(block))
            .collect();
        if idx.is_empty() {
            writeln!(out, "{block}: all entries constant, no plot")?;
            continue;
        }
        let path = out_dir.join(format!("{id}-{block}.svg"));
        write_file(
            &path,
            &svg_plot(&format!("{id}: entries of {block}"), &traj.times, &series(&traj, &idx)),
        )?;
        writeln!(out, "wrote {}", path.display())?;
    }
    let checks = reproduce_checks(&p, &traj).map_err(|e| CliError::new(exit::REPRODUCE_FAILED, e.to_string()))?;
    for c in &checks {
        writeln!(out, "{c}")?;
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    if !failed.is_empty() {
        return Err(CliError::new(
            exit::REPRODUCE_FAILED,
            format!("{id}: failed {}", failed.join(", ")),
        ));
    }
    Ok(())
}

/// `verify --seed S --trials N`
pub fn cmd_verify(seed: Option<u64>, trials: usize, dt: f64, tol: Tolerances, out: &mut dyn Write) -> CliResult<()> {
    let seed = match seed {
        Some(s) => s,
        None => seed_from_env(0)?,
    };
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(CliError::usage(format!("dt must be positive, got {dt}")));
    }
    let cfg = VerifyConfig { seed, trials, dt, tol };
    let reports = run_verify(&cfg);
    writeln!(out, "seed {seed}, trials {trials}, dt {dt}")?;
    for r in &reports {
        writeln!(out, "{r}")?;
    }
    let passed = reports.iter().filter(|r| r.passed).count();
    writeln!(out, "{passed}/{} properties passed", reports.len())?;
    if !all_passed(&reports) {
        let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name.as_str()).collect();
        return Err(CliError::new(
            exit::VERIFY_FAILED,
            format!("failed: {}", failed.join("; ")),
        ));
    }
    Ok(())
}
