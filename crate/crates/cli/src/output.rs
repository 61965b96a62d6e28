//! Trajectory CSV, monitor CSV and SVG line plots.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use bwrank::geodesics::{GeodesicState, Trajectory};

use crate::{CliError, CliResult};

const BLOCKS: [&str; 4] = ["Q", "D", "B", "S"];

fn block<'a>(s: &'a GeodesicState, name: &str) -> &'a bwrank::Mat {
    match name {
        "Q" => &s.q,
        "D" => &s.d,
        "B" => &s.b,
        _ => &s.s,
    }
}

/// Column names after `t`: `Q[i][j]`, `D[i][j]`, `B[i][j]`, `S[i][j]`, row-major.
pub fn entry_names(s: &GeodesicState) -> Vec<String> {
    let mut out = Vec::new();
    for name in BLOCKS {
        let m = block(s, name);
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out.push(format!("{name}[{i}][{j}]"));
            }
        }
    }
    out
}

pub fn state_row(s: &GeodesicState) -> Vec<f64> {
    let mut out = Vec::new();
    for name in BLOCKS {
        let m = block(s, name);
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out.push(m[(i, j)]);
            }
        }
    }
    out
}

fn push_row(out: &mut String, t: f64, values: impl IntoIterator<Item = f64>) {
    write!(out, "{t}").unwrap();
    for v in values {
        write!(out, ",{v}").unwrap();
    }
    out.push('\n');
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t");
    for name in entry_names(traj.initial()) {
        out.push(',');
        out.push_str(&name);
    }
    out.push('\n');
    for (t, s) in traj.times.iter().zip(&traj.states) {
        push_row(&mut out, *t, state_row(s));
    }
    out
}

pub const MONITOR_COLUMNS: [&str; 6] = [
    "t",
    "energy",
    "momentum_residual",
    "angular_momentum_residual",
    "orthogonality_residual",
    "reortho_correction",
];

pub fn monitors_csv(traj: &Trajectory) -> String {
    let mut out = MONITOR_COLUMNS.join(",");
    out.push('\n');
    for (t, m) in traj.times.iter().zip(&traj.monitors) {
        push_row(
            &mut out,
            *t,
            [
                m.energy,
                m.momentum_residual,
                m.angular_momentum_residual,
                m.orthogonality_residual,
                m.reortho_correction,
            ],
        );
    }
    out
}

/// `run.csv` → `run.monitors.csv`
pub fn monitors_path(csv: &Path) -> PathBuf {
    let stem = csv
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    csv.with_file_name(format!("{stem}.monitors.csv"))
}

/// Indices into [`entry_names`] of entries that move by more than `tol`.
pub fn changing_entries(traj: &Trajectory, tol: f64) -> Vec<usize> {
    let first = state_row(traj.initial());
    let mut moved = vec![false; first.len()];
    for s in &traj.states {
        for (i, v) in state_row(s).into_iter().enumerate() {
            moved[i] |= (v - first[i]).abs() > tol;
        }
    }
    moved.iter().enumerate().filter(|(_, m)| **m).map(|(i, _)| i).collect()
}

pub fn select_entries(traj: &Trajectory, names: &[String]) -> CliResult<Vec<usize>> {
    let all = entry_names(traj.initial());
    names
        .iter()
        .map(|n| {
            all.iter()
                .position(|a| a == n)
                .ok_or_else(|| CliError::usage(format!("unknown entry `{n}` in svg output")))
        })
        .collect()
}

/// `(name, values)` for the chosen columns.
pub fn series(traj: &Trajectory, idx: &[usize]) -> Vec<(String, Vec<f64>)> {
    let names = entry_names(traj.initial());
    let rows: Vec<Vec<f64>> = traj.states.iter().map(state_row).collect();
    idx.iter()
        .map(|&i| (names[i].clone(), rows.iter().map(|r| r[i]).collect()))
        .collect()
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const MAX_POINTS: usize = 400;

/// Line plot of several series against `t`, deterministic text output.
pub fn svg_plot(title: &str, times: &[f64], lines: &[(String, Vec<f64>)]) -> String {
    let (w, h) = (720.0, 420.0);
    let (left, right, top, bottom) = (70.0, 150.0, 40.0, 50.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let t0 = times.first().copied().unwrap_or(0.0);
    let t1 = times.last().copied().unwrap_or(1.0);
    let tspan = if t1 > t0 { t1 - t0 } else { 1.0 };
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (_, v) in lines {
        for x in v {
            lo = lo.min(*x);
            hi = hi.max(*x);
        }
    }
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        (lo, hi) = (lo - 0.5, hi + 0.5);
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let px = |t: f64| left + pw * (t - t0) / tspan;
    let py = |y: f64| top + ph * (hi - y) / (hi - lo);

    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
    writeln!(
        out,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{title}</text>"#,
        left + pw / 2.0
    )
    .unwrap();
    writeln!(
        out,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    )
    .unwrap();
    for i in 0..=4 {
        let f = i as f64 / 4.0;
        let (t, y) = (t0 + f * tspan, lo + f * (hi - lo));
        let (x, yy) = (px(t), py(y));
        writeln!(
            out,
            r##"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="#ccc"/>"##,
            top,
            top + ph
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{x:.2}" y="{}" text-anchor="middle">{t:.3}</text>"#,
            top + ph + 18.0
        )
        .unwrap();
        writeln!(
            out,
            r##"<line x1="{left}" y1="{yy:.2}" x2="{}" y2="{yy:.2}" stroke="#ccc"/>"##,
            left + pw
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{}" y="{:.2}" text-anchor="end">{y:.4}</text>"#,
            left - 6.0,
            yy + 4.0
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle">t</text>"#,
        left + pw / 2.0,
        h - 10.0
    )
    .unwrap();
    let stride = times.len().div_ceil(MAX_POINTS).max(1);
    for (n, (name, values)) in lines.iter().enumerate() {
        let color = PALETTE[n % PALETTE.len()];
        let mut pts: Vec<String> = times
            .iter()
            .zip(values)
            .step_by(stride)
            .map(|(t, y)| format!("{:.2},{:.2}", px(*t), py(*y)))
            .collect();
        if !(times.len() - 1).is_multiple_of(stride) {
            if let (Some(t), Some(y)) = (times.last(), values.last()) {
                pts.push(format!("{:.2},{:.2}", px(*t), py(*y)));
            }
        }
        writeln!(
            out,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            pts.join(" ")
        )
        .unwrap();
        let ly = top + 14.0 + 18.0 * n as f64;
        let lx = left + pw + 12.0;
        writeln!(
            out,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        )
        .unwrap();
        writeln!(out, r#"<text x="{}" y="{}">{name}</text>"#, lx + 26.0, ly + 4.0).unwrap();
    }
    out.push_str("</svg>\n");
    out
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::usage(format!("cannot create {}: {e}", dir.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use bwrank::geodesics::{integrate, IntegrateOptions};
    use bwrank::presets::{preset, PresetId};

    fn ex3() -> Trajectory {
        let p = preset(PresetId::Ex3A);
        integrate(
            &p.initial_state(),
            &IntegrateOptions {
                t_max: 0.1,
                dt: 0.01,
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn header_layout() {
        let traj = ex3();
        let names = entry_names(traj.initial());
        assert_eq!(names.len(), 15 + 9 + 6 + 9);
        assert_eq!(names[0], "Q[0][0]");
        assert_eq!(names[15], "D[0][0]");
        let csv = trajectory_csv(&traj);
        let mut lines = csv.lines();
        assert!(lines.next().unwrap().starts_with("t,Q[0][0],Q[0][1]"));
        assert_eq!(csv.lines().count(), traj.len() + 1);
        assert_eq!(monitors_csv(&traj).lines().count(), traj.len() + 1);
    }

    #[test]
    fn changing_entries_of_example() {
        let traj = ex3();
        let names = entry_names(traj.initial());
        let moving: Vec<&str> = changing_entries(&traj, 1e-12)
            .into_iter()
            .map(|i| names[i].as_str())
            .collect();
        for e in [
            "Q[0][0]", "Q[3][0]", "Q[1][1]", "Q[4][1]", "D[0][0]", "D[2][2]", "B[0][0]", "S[2][2]",
        ] {
            assert!(moving.contains(&e), "{e}");
        }
        for e in ["Q[2][2]", "D[0][1]", "B[0][1]", "Q[0][1]"] {
            assert!(!moving.contains(&e), "{e}");
        }
    }

    #[test]
    fn svg_is_well_formed() {
        let traj = ex3();
        let idx = select_entries(&traj, &["D[0][0]".into(), "D[2][2]".into()]).unwrap();
        let svg = svg_plot("D", &traj.times, &series(&traj, &idx));
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(select_entries(&traj, &["X[0][0]".into()]).is_err());
    }

    #[test]
    fn monitor_sibling() {
        assert_eq!(
            monitors_path(Path::new("out/run.csv")),
            PathBuf::from("out/run.monitors.csv")
        );
    }
}
