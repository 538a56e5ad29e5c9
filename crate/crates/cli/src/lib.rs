//! Command-line front end for the copositive-cone toolkit.

#![allow(clippy::needless_range_loop)]

pub mod io;
pub mod reproduce;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use copocone::anglesearch::is_feasible_copositive;
use copocone::{
    angle_between, classify_signs, eigendecompose, inner_product, is_copositive, multistart_max_angle,
    psi_search, scaled_params, simplex_oracle, theorem_family_pair, CopoError, SearchConfig, SearchReport,
    SymMatrix,
};
use serde_json::{json, Value};

pub use io::{format_matrix, load_matrix, parse_matrix, write_matrix};
pub use reproduce::{reproduce_all, ReportRow, Seeds};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("matrix is not symmetric: |a[{row}][{col}] - a[{col}][{row}]| = {deviation:e}")]
    Asymmetry { row: usize, col: usize, deviation: f64 },
    #[error("cannot access {path}: {message}")]
    Io { path: String, message: String },
    #[error(transparent)]
    Core(#[from] CopoError),
}

impl CliError {
    /// Malformed input is a usage problem; everything else is a failed run.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::Asymmetry { .. } | CliError::Io { .. } => 2,
            CliError::Core(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "copocone", version, about = "Copositivity tests and maximal angles of the copositive cone")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact copositivity test of an order 1-3 matrix file.
    Check {
        file: PathBuf,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        /// Cross-check with the simplex lattice oracle at this resolution.
        #[arg(long)]
        oracle: Option<u32>,
    },
    /// Sign case, scaled parameters and semidefiniteness.
    Classify { file: PathBuf },
    /// Angle between two matrices.
    Angle { file_a: PathBuf, file_b: PathBuf },
    /// Multistart maximal-angle search on the copositive cone.
    Search {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 64)]
        starts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-start CSV rows instead of the JSON report.
        #[arg(long)]
        csv: bool,
    },
    /// Maximal angle between semidefinite and nonnegative matrices.
    Psi {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 64)]
        starts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        csv: bool,
    },
    /// A member of the order-3 maximal-angle family.
    Family {
        #[arg(long)]
        a22: f64,
    },
    /// Recompute every published constant and report pass/fail rows.
    Reproduce {
        #[arg(long)]
        out: Option<PathBuf>,
        /// Use this seed for every search and sampler instead of the defaults.
        #[arg(long)]
        seed: Option<u64>,
    },
}

/// Output of one command: what to print and the exit code.
pub struct Output {
    pub stdout: String,
    pub code: u8,
}

fn json_out(v: &Value, code: u8) -> Output {
    Output { stdout: serde_json::to_string_pretty(v).expect("serializable") + "\n", code }
}

/// Runs a parsed command.
pub fn execute(cmd: Command) -> Result<Output, CliError> {
    match cmd {
        Command::Check { file, tol, oracle } => {
            let a = load_matrix(&file)?;
            let v = is_copositive(&a, tol)?;
            let mut out = json!({
                "order": a.order(),
                "member": v.member,
                "margin": v.margin,
                "certificate": v.certificate,
            });
            if let Some(res) = oracle {
                let grid = simplex_oracle(&a, res)?;
                let agrees = (grid.value >= -tol) == v.member || v.margin.abs() <= 1e-6;
                out["oracle"] = json!({
                    "resolution": res,
                    "value": grid.value,
                    "argmin": grid.argmin,
                    "agrees": agrees,
                });
            }
            Ok(json_out(&out, 0))
        }
        Command::Classify { file } => {
            let a = load_matrix(&file)?;
            let spec = eigendecompose(&a)?;
            let mut out = json!({
                "order": a.order(),
                "min_eigenvalue": spec.min(),
                "psd": spec.min() >= -1e-10,
                "case_signature": null,
                "scaled_params": null,
            });
            if a.order() == 3 {
                out["case_signature"] = json!(classify_signs(&a)?);
                if let Ok(p) = scaled_params(&a) {
                    out["scaled_params"] = json!(p);
                }
            }
            Ok(json_out(&out, 0))
        }
        Command::Angle { file_a, file_b } => {
            let a = load_matrix(&file_a)?;
            let b = load_matrix(&file_b)?;
            let cos = inner_product(&a.normalized()?, &b.normalized()?)?;
            let angle = angle_between(&a, &b)?;
            let feasible = |m: &SymMatrix| is_feasible_copositive(m).ok();
            let (fa, fb) = (feasible(&a), feasible(&b));
            let code = if fa == Some(false) || fb == Some(false) { 1 } else { 0 };
            let out = json!({
                "inner": cos,
                "angle_rad": angle,
                "angle_over_pi": angle / std::f64::consts::PI,
                "a_copositive": fa,
                "b_copositive": fb,
            });
            Ok(json_out(&out, code))
        }
        Command::Search { n, starts, seed, csv } => {
            let report = multistart_max_angle(&SearchConfig::new(n, starts, seed))?;
            Ok(search_out(&report, csv))
        }
        Command::Psi { n, starts, seed, csv } => {
            let report = psi_search(n, &SearchConfig::new(n, starts, seed))?;
            Ok(search_out(&report, csv))
        }
        Command::Family { a22 } => {
            let p = theorem_family_pair(a22)?;
            let stdout = format!(
                "# A\n{}# B\n{}# inner {:.16e}\n# angle_over_pi {:.16e}\n",
                format_matrix(&p.a),
                format_matrix(&p.b),
                p.inner,
                p.angle / std::f64::consts::PI
            );
            Ok(Output { stdout, code: 0 })
        }
        Command::Reproduce { out, seed } => {
            let seeds = seed.map(Seeds::uniform).unwrap_or_default();
            let rows = reproduce_all(seeds)?;
            let csv = reproduce::to_csv(&rows);
            let code = if rows.iter().all(|r| r.pass) { 0 } else { 1 };
            match out {
                Some(path) => {
                    std::fs::write(&path, &csv).map_err(|e| CliError::Io {
                        path: path.display().to_string(),
                        message: e.to_string(),
                    })?;
                    let failed: Vec<&str> =
                        rows.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
                    let summary = format!("{} rows, {} failed {:?}\n", rows.len(), failed.len(), failed);
                    Ok(Output { stdout: summary, code })
                }
                None => Ok(Output { stdout: csv, code }),
            }
        }
    }
}

fn search_out(report: &SearchReport, csv: bool) -> Output {
    if !csv {
        return json_out(&json!(report), 0);
    }
    let mut out = String::from("index,final_angle,angle_over_pi,iterations,converged\n");
    for s in &report.per_start {
        let angle = s.final_angle.map_or(String::new(), |a| format!("{a:.16e}"));
        let over_pi = s.final_angle.map_or(String::new(), |a| format!("{:.16e}", a / std::f64::consts::PI));
        out.push_str(&format!("{},{},{},{},{}\n", s.index, angle, over_pi, s.iterations, s.converged));
    }
    Output { stdout: out, code: 0 }
}

/// Parses `argv` (program name first), runs it, and writes to the given
/// streams. Returns the process exit code.
pub fn run<I, T>(argv: I, stdout: &mut impl Write, stderr: &mut impl Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(rendered.as_bytes())
            } else {
                stderr.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command) {
        Ok(out) => {
            let _ = stdout.write_all(out.stdout.as_bytes());
            out.code
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
