//! Plain-text matrix files.
//!
//! The first meaningful line holds the order `n`; the next `n` lines hold
//! the rows as whitespace-separated decimals. Blank lines and lines starting
//! with `#` are skipped anywhere in the file.

use std::fmt::Write as _;
use std::path::Path;

use copocone::SymMatrix;

use crate::CliError;

/// Largest tolerated `|a_ij - a_ji|` before the file is rejected.
pub const ASYMMETRY_TOL: f64 = 1e-9;

pub fn load_matrix(path: &Path) -> Result<SymMatrix, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_matrix(&text)
}

pub fn parse_matrix(text: &str) -> Result<SymMatrix, CliError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (line, header) = lines.next().ok_or_else(|| CliError::Parse("empty matrix file".into()))?;
    let n: usize = header
        .parse()
        .map_err(|_| CliError::Parse(format!("line {line}: expected the order, got {header:?}")))?;
    if n == 0 {
        return Err(CliError::Parse(format!("line {line}: order must be positive")));
    }

    let mut rows = Vec::with_capacity(n);
    for r in 0..n {
        let (line, text) =
            lines.next().ok_or_else(|| CliError::Parse(format!("expected {n} rows, found {r}")))?;
        let row: Vec<f64> = text
            .split_whitespace()
            .map(|tok| {
                tok.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| CliError::Parse(format!("line {line}: bad number {tok:?}")))
            })
            .collect::<Result<_, _>>()?;
        if row.len() != n {
            return Err(CliError::Parse(format!("line {line}: expected {n} entries, found {}", row.len())));
        }
        rows.push(row);
    }
    if let Some((line, _)) = lines.next() {
        return Err(CliError::Parse(format!("line {line}: trailing data after {n} rows")));
    }

    for i in 0..n {
        for j in i + 1..n {
            let dev = (rows[i][j] - rows[j][i]).abs();
            if dev > ASYMMETRY_TOL {
                return Err(CliError::Asymmetry { row: i, col: j, deviation: dev });
            }
        }
    }
    SymMatrix::from_rows(&rows).map_err(|e| CliError::Parse(e.to_string()))
}

/// Serializes with 17 significant digits, which round-trips every double.
pub fn format_matrix(m: &SymMatrix) -> String {
    let n = m.order();
    let mut out = format!("{n}\n");
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| format!("{:.16e}", m.get(i, j))).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
    out
}

pub fn write_matrix(path: &Path, m: &SymMatrix) -> Result<(), CliError> {
    std::fs::write(path, format_matrix(m))
        .map_err(|e| CliError::Io { path: path.display().to_string(), message: e.to_string() })
}
