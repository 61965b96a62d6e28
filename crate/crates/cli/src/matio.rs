//! Plain-text matrices: one row per line, whitespace-separated numbers.
//! Blank lines and lines starting with `#` are skipped.

use std::path::Path;

use bwrank::Mat;

use crate::{CliError, CliResult};

pub fn parse_matrix(text: &str) -> CliResult<Mat> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| CliError::usage(format!("line {}: cannot parse `{tok}` as a number", lineno + 1)))
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    from_rows(&rows).map_err(|e| CliError::usage(e.message))
}

pub fn read_matrix(path: &Path) -> CliResult<Mat> {
    let text =
        std::fs::read_to_string(path).map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    parse_matrix(&text).map_err(|e| CliError::usage(format!("{}: {}", path.display(), e.message)))
}

/// Rectangular rows to a matrix; an empty list is a 0×0 matrix.
pub fn from_rows(rows: &[Vec<f64>]) -> CliResult<Mat> {
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != ncols) {
        return Err(CliError::usage(format!(
            "row {} has {} entries, expected {ncols}",
            i + 1,
            r.len()
        )));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(CliError::usage("matrix has non-finite entries"));
    }
    Ok(Mat::from_fn(rows.len(), ncols, |i, j| rows[i][j]))
}

pub fn format_matrix(m: &Mat) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols()).map(|j| format!("{}", m[(i, j)])).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}
