use serde::{Deserialize, Serialize};

use super::MetricsReport;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator); 0 for a single value.
    pub std: f64,
}

impl MetricSummary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Some(Self { mean, std })
    }
}

/// Mean and std of every metric over a set of trials. `sid` only covers the
/// trials with an acyclic estimate and is `None` if there were none.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialAggregate {
    pub count: usize,
    pub tpr: MetricSummary,
    pub fdr: MetricSummary,
    pub shd: MetricSummary,
    pub sid: Option<MetricSummary>,
    pub sid_count: usize,
    pub n_predicted_edges: MetricSummary,
    pub n_correct_edges: MetricSummary,
}

impl TrialAggregate {
    /// `(name, summary)` rows in a fixed order.
    pub fn rows(&self) -> Vec<(&'static str, MetricSummary)> {
        let mut rows = vec![("tpr", self.tpr), ("fdr", self.fdr), ("shd", self.shd)];
        if let Some(sid) = self.sid {
            rows.push(("sid", sid));
        }
        rows.push(("n_predicted_edges", self.n_predicted_edges));
        rows.push(("n_correct_edges", self.n_correct_edges));
        rows
    }
}

pub fn aggregate_trials(reports: &[MetricsReport]) -> Result<TrialAggregate> {
    if reports.is_empty() {
        return Err(Error::Input(
            "cannot aggregate an empty list of reports".into(),
        ));
    }
    let col = |f: &dyn Fn(&MetricsReport) -> f64| -> MetricSummary {
        let v: Vec<f64> = reports.iter().map(f).collect();
        MetricSummary::of(&v).expect("non-empty")
    };
    let sids: Vec<f64> = reports
        .iter()
        .filter_map(|r| r.sid.map(|s| s as f64))
        .collect();
    Ok(TrialAggregate {
        count: reports.len(),
        tpr: col(&|r| r.tpr),
        fdr: col(&|r| r.fdr),
        shd: col(&|r| r.shd as f64),
        sid: MetricSummary::of(&sids),
        sid_count: sids.len(),
        n_predicted_edges: col(&|r| r.n_predicted_edges as f64),
        n_correct_edges: col(&|r| r.n_correct_edges as f64),
    })
}
