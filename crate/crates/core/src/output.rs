//! CSV and JSON serialization of spectra.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::xsec::{max_relative_deviation, Peak, Route, SpectrumResult};

pub const CSV_COLUMNS: [&str; 9] = [
    "q_internal",
    "q_keV",
    "total",
    "coherent",
    "incoherent",
    "linear_only",
    "born_total",
    "born_coherent",
    "born_incoherent",
];

fn format_value(v: f64) -> String {
    // 17 significant digits round-trip every double.
    format!("{v:.16e}")
}

/// Writes one spectrum as CSV; absent columns are left empty.
pub fn write_csv<W: Write>(result: &SpectrumResult, writer: W) -> Result<()> {
    let n = result.q_internal.len();
    let columns: [Option<&Vec<f64>>; 9] = [
        Some(&result.q_internal),
        Some(&result.q_kev),
        Some(&result.total),
        result.coherent.as_ref(),
        result.incoherent.as_ref(),
        result.linear_only.as_ref(),
        result.born_total.as_ref(),
        result.born_coherent.as_ref(),
        result.born_incoherent.as_ref(),
    ];
    for (name, col) in CSV_COLUMNS.iter().zip(&columns) {
        if let Some(c) = col {
            if c.len() != n {
                return Err(Error::Serialization(format!(
                    "column {name} has {} rows, expected {n}",
                    c.len()
                )));
            }
            if let Some(bad) = c.iter().find(|v| !v.is_finite()) {
                return Err(Error::Serialization(format!(
                    "column {name} contains {bad}"
                )));
            }
        }
    }
    if result.q_internal.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Serialization(
            "q column is not strictly increasing".into(),
        ));
    }
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(CSV_COLUMNS)?;
    for i in 0..n {
        let row: Vec<String> = columns
            .iter()
            .map(|c| c.map(|c| format_value(c[i])).unwrap_or_default())
            .collect();
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// One row of a CSV read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub values: [Option<f64>; 9],
}

impl CsvRow {
    pub fn q(&self) -> Option<f64> {
        self.values[0]
    }

    pub fn column(&self, name: &str) -> Option<f64> {
        CSV_COLUMNS
            .iter()
            .position(|c| *c == name)
            .and_then(|i| self.values[i])
    }
}

/// Reads a spectrum CSV and rejects anything outside the schema: wrong
/// header, missing q or total, non-finite values, q not strictly increasing.
pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_COLUMNS {
        return Err(Error::Serialization(format!(
            "unexpected CSV header {header:?}"
        )));
    }
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let line = rows.len() + 2;
        let mut values = [None; 9];
        for (slot, field) in values.iter_mut().zip(rec.iter()) {
            if !field.is_empty() {
                let v: f64 = field.parse().map_err(|_| {
                    Error::Serialization(format!("line {line}: cannot parse '{field}' as a number"))
                })?;
                if !v.is_finite() {
                    return Err(Error::Serialization(format!(
                        "line {line}: non-finite value {v}"
                    )));
                }
                *slot = Some(v);
            }
        }
        if values[0].is_none() || values[2].is_none() {
            return Err(Error::Serialization(format!(
                "line {line}: q_internal and total are required"
            )));
        }
        if let Some(prev) = rows.last().and_then(|r: &CsvRow| r.q()) {
            if values[0].is_some_and(|q| q <= prev) {
                return Err(Error::Serialization(format!(
                    "line {line}: q is not strictly increasing"
                )));
            }
        }
        rows.push(CsvRow { values });
    }
    Ok(rows)
}

/// Comparison of the two eikonal routes.
#[derive(Debug, Clone, Serialize)]
pub struct RouteAgreement {
    /// Largest relative deviation where the total exceeds 1% of its maximum.
    pub max_relative_deviation: f64,
    pub threshold: f64,
    pub within_threshold: bool,
}

impl RouteAgreement {
    pub fn compare(factorized: &SpectrumResult, direct: &SpectrumResult, threshold: f64) -> Self {
        let dev = max_relative_deviation(&factorized.total, &direct.total, 0.01);
        RouteAgreement {
            max_relative_deviation: dev,
            threshold,
            within_threshold: dev <= threshold,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RouteSummary {
    pub route: Route,
    pub csv: PathBuf,
    pub grid: Option<crate::quadrature::GridSpec>,
    pub imaginary_residue: f64,
    pub peaks: Vec<Peak>,
}

/// Metadata written next to the CSV files.
#[derive(Debug, Clone, Serialize)]
pub struct Sidecar {
    pub amplitude: f64,
    pub spacing_over_r: f64,
    pub n_planes: usize,
    pub planes_isolated: bool,
    pub r_angstrom: f64,
    pub kev_per_inverse_r: f64,
    /// Densities `v` are such that dσ/dq_x = v · L_y · R².
    pub density_unit: String,
    pub window_tol: f64,
    pub seed: u64,
    pub neglected_term_estimate: f64,
    pub routes: Vec<RouteSummary>,
    pub route_agreement: Option<RouteAgreement>,
    pub config: serde_json::Value,
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n")?;
    Ok(())
}
