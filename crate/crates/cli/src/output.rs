//! Serialized shapes of command results, plus writers.

use std::fs;
use std::io::Write;
use std::path::Path;

use ko_core::entire_solutions::Operator;
use ko_core::matrixops::SymMatrix;
use ko_core::radial_ode::{InvariantReport, ProfileStatus, RadialProfile};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Result of `ko operator`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorReport {
    pub operator: Operator,
    pub value: f64,
    /// Eigenvalues in ascending order.
    pub spectrum: Vec<f64>,
    pub matrix: SymMatrix,
    /// `"random"` or the path of the matrix file.
    pub source: String,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    pub operator: Operator,
    pub n: usize,
    pub points: usize,
    pub radius: f64,
    pub max_abs: f64,
    pub max_defect: f64,
    pub worst_r: f64,
    /// Largest residual relative to `max(1, |f|)`; for the sup-operator only
    /// the subsolution defect counts.
    pub worst_relative: f64,
    pub tol: f64,
    pub passed: bool,
}

/// Result of `ko verify`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub profile: String,
    pub seed: u64,
    pub invariants: InvariantReport,
    pub violations: Vec<String>,
    pub residual: Option<ResidualSummary>,
    pub passed: bool,
}

/// One line of `ko sweep` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub index: usize,
    pub spec: String,
    pub c: f64,
    pub a: f64,
    /// `global`, `blowup` or `error`.
    pub status: String,
    pub r_lo: Option<f64>,
    pub r_hi: Option<f64>,
    /// Energy bounds on the blow-up radius, when the spec admits them.
    pub lower_bound: Option<f64>,
    pub upper_bound: Option<f64>,
    pub samples: Option<usize>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub series: String,
    pub r: f64,
    pub phi: f64,
}

/// Profile samples as `profile` rows, then one row per marker at the height
/// of the last sample so that it can be drawn as a vertical line.
pub fn plot_rows(profile: &RadialProfile, extra: &[(&str, f64)]) -> Vec<PlotRow> {
    let mut rows: Vec<PlotRow> = profile
        .samples
        .iter()
        .map(|s| PlotRow {
            series: "profile".into(),
            r: s.r,
            phi: s.phi,
        })
        .collect();
    let top = profile.last().phi;
    let mut markers = match profile.status {
        ProfileStatus::BlowUp { r_lo, r_hi } => vec![("blowup_lo", r_lo), ("blowup_hi", r_hi)],
        ProfileStatus::Global { r_max } => vec![("horizon", r_max)],
    };
    markers.extend_from_slice(extra);
    rows.extend(markers.into_iter().map(|(name, r)| PlotRow {
        series: name.into(),
        r,
        phi: top,
    }));
    rows
}

pub fn to_csv<T: Serialize>(rows: &[T]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| CliError::usage(format!("csv: {e}")))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::usage(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

pub fn from_csv<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>, csv::Error> {
    csv::Reader::from_reader(text.as_bytes()).deserialize().collect()
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("result serialization cannot fail");
    s.push('\n');
    s
}

pub fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Writes to `path`, or stdout when absent.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io("<stdout>", e))
        }
    }
}
