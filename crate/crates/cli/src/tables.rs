//! Per-trial records and the aggregate tables written by `bench`.

use std::fmt::Write as _;
use std::path::Path;

use casper_core::metrics::{aggregate_trials, MetricSummary, MetricsReport};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub method: String,
    pub setting: String,
    pub trial: usize,
    pub seed: u64,
    /// `None` when the fit failed.
    pub report: Option<MetricsReport>,
    pub converged: Option<bool>,
    pub final_h: Option<f64>,
    pub error: Option<String>,
}

/// One (method, setting, metric) row of the aggregate table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AggregateRow {
    pub method: String,
    pub setting: String,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
}

/// Aggregates successful trials per (method, setting), keeping the order in
/// which each pair first appears in `records`.
pub fn aggregate_rows(records: &[TrialRecord]) -> Result<Vec<AggregateRow>> {
    let mut groups: Vec<(String, String, Vec<MetricsReport>, usize)> = Vec::new();
    for r in records {
        let pos = match groups
            .iter()
            .position(|g| g.0 == r.method && g.1 == r.setting)
        {
            Some(p) => p,
            None => {
                groups.push((r.method.clone(), r.setting.clone(), Vec::new(), 0));
                groups.len() - 1
            }
        };
        match &r.report {
            Some(report) => groups[pos].2.push(report.clone()),
            None => groups[pos].3 += 1,
        }
    }
    let mut rows = Vec::new();
    for (method, setting, reports, failed) in groups {
        let row = |metric: &str, s: MetricSummary| AggregateRow {
            method: method.clone(),
            setting: setting.clone(),
            metric: metric.to_string(),
            mean: s.mean,
            std: s.std,
        };
        let count = |metric: &str, n: usize| {
            row(
                metric,
                MetricSummary {
                    mean: n as f64,
                    std: 0.0,
                },
            )
        };
        // A fully failed cell keeps its n_trials = 0 and failed_trials rows.
        if !reports.is_empty() {
            let agg = aggregate_trials(&reports)?;
            rows.extend(agg.rows().into_iter().map(|(m, s)| row(m, s)));
        }
        rows.push(count("n_trials", reports.len()));
        if failed > 0 {
            rows.push(count("failed_trials", failed));
        }
    }
    Ok(rows)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// `method,setting,metric,mean,std`.
pub fn aggregate_csv(rows: &[AggregateRow]) -> String {
    let mut out = String::from("method,setting,metric,mean,std\n");
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.method, r.setting, r.metric, r.mean, r.std
        )
        .unwrap();
    }
    out
}

/// Aligned table: one line per (method, setting), one `mean±std` column per metric.
pub fn aggregate_text(rows: &[AggregateRow]) -> String {
    let mut metrics: Vec<&str> = Vec::new();
    let mut keys: Vec<(&str, &str)> = Vec::new();
    for r in rows {
        if !metrics.contains(&r.metric.as_str()) {
            metrics.push(&r.metric);
        }
        if !keys.contains(&(r.method.as_str(), r.setting.as_str())) {
            keys.push((&r.method, &r.setting));
        }
    }
    let mut table: Vec<Vec<String>> = Vec::new();
    let mut header = vec!["method".to_string(), "setting".to_string()];
    header.extend(metrics.iter().map(|m| m.to_string()));
    table.push(header);
    for (method, setting) in &keys {
        let mut line = vec![method.to_string(), setting.to_string()];
        for m in &metrics {
            let cell = rows
                .iter()
                .find(|r| r.method == *method && r.setting == *setting && r.metric == *m)
                .map(|r| format!("{:.3}±{:.3}", r.mean, r.std))
                .unwrap_or_else(|| "-".to_string());
            line.push(cell);
        }
        table.push(line);
    }
    let widths: Vec<usize> = (0..table[0].len())
        .map(|c| {
            table
                .iter()
                .map(|row| row[c].chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for row in &table {
        let cells: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, &w)| format!("{cell}{}", " ".repeat(w - cell.chars().count())))
            .collect();
        writeln!(out, "{}", cells.join("  ").trim_end()).unwrap();
    }
    out
}

/// Long format for plotting: `method,setting,trial,metric,value`.
pub fn long_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from("method,setting,trial,metric,value\n");
    for r in records {
        let Some(rep) = &r.report else { continue };
        let mut values = vec![("tpr", rep.tpr), ("fdr", rep.fdr), ("shd", rep.shd as f64)];
        if let Some(sid) = rep.sid {
            values.push(("sid", sid as f64));
        }
        values.push(("n_predicted_edges", rep.n_predicted_edges as f64));
        values.push(("n_correct_edges", rep.n_correct_edges as f64));
        for (metric, value) in values {
            writeln!(
                out,
                "{},{},{},{},{}",
                r.method, r.setting, r.trial, metric, value
            )
            .unwrap();
        }
    }
    out
}

/// `method,setting,trial,seed,error` for failed fits.
pub fn failures_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from("method,setting,trial,seed,error\n");
    for r in records.iter().filter(|r| r.report.is_none()) {
        let msg = r.error.as_deref().unwrap_or("").replace(['"', '\n'], " ");
        writeln!(
            out,
            "{},{},{},{},\"{}\"",
            r.method, r.setting, r.trial, r.seed, msg
        )
        .unwrap();
    }
    out
}

/// Writes aggregate.csv, aggregate.txt, long.csv, failures.csv and trials.json.
pub fn write_all(dir: &Path, records: &[TrialRecord]) -> Result<Vec<AggregateRow>> {
    let rows = aggregate_rows(records)?;
    write_text(&dir.join("aggregate.csv"), &aggregate_csv(&rows))?;
    write_text(&dir.join("aggregate.txt"), &aggregate_text(&rows))?;
    write_text(&dir.join("long.csv"), &long_csv(records))?;
    write_text(&dir.join("failures.csv"), &failures_csv(records))?;
    write_text(
        &dir.join("trials.json"),
        &serde_json::to_string_pretty(records)?,
    )?;
    Ok(rows)
}
