//! Loading and validating external observational datasets.

use std::path::Path;

use casper_core::io::read_dataset_csv;
use casper_core::sem::Dataset;
use serde::Serialize;

use crate::error::{CliError, Result};

/// Summary printed by `ingest-check`.
#[derive(Debug, Clone, Serialize)]
pub struct IngestReport {
    pub path: String,
    pub n: usize,
    pub d: usize,
    pub names: Vec<String>,
    pub standardized: bool,
    pub column_means: Vec<f64>,
    pub column_stds: Vec<f64>,
    /// Columns with zero variance; they carry no information for the learners.
    pub constant_columns: Vec<String>,
}

/// Reads a headered CSV and optionally standardizes each column.
///
/// An empty body is an input error. Constant columns are only centered and
/// reported with a warning.
pub fn ingest_csv(path: &Path, standardize: bool) -> Result<(Dataset, IngestReport)> {
    let raw = read_dataset_csv(path)?;
    if raw.n() == 0 {
        return Err(CliError::Input(format!("{}: no data rows", path.display())));
    }
    let data = if standardize { raw.standardized() } else { raw };
    let n = data.n() as f64;
    let mut means = Vec::with_capacity(data.d());
    let mut stds = Vec::with_capacity(data.d());
    let mut constant = Vec::new();
    for (c, col) in data.values().column_iter().enumerate() {
        let mean = col.sum() / n;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        if var == 0.0 {
            constant.push(data.names()[c].clone());
        }
        means.push(mean);
        stds.push(var.sqrt());
    }
    if !constant.is_empty() {
        log::warn!(
            "{}: constant column(s) {}",
            path.display(),
            constant.join(", ")
        );
    }
    let report = IngestReport {
        path: path.display().to_string(),
        n: data.n(),
        d: data.d(),
        names: data.names().to_vec(),
        standardized: standardize,
        column_means: means,
        column_stds: stds,
        constant_columns: constant,
    };
    Ok((data, report))
}
