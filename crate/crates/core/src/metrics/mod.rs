//! Structure-recovery metrics: SHD, TPR/FDR, SID, d-separation and trial
//! aggregation.

mod aggregate;
mod dsep;
mod sid;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::BinaryGraph;

pub use aggregate::{aggregate_trials, MetricSummary, TrialAggregate};
pub use dsep::d_separated;
pub use sid::{sid, sid_with};

/// Metrics of one estimate against one truth. `sid` is `None` when the
/// estimate is cyclic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub tpr: f64,
    pub fdr: f64,
    pub shd: usize,
    pub sid: Option<usize>,
    pub n_predicted_edges: usize,
    pub n_correct_edges: usize,
}

fn check_pair(truth: &BinaryGraph, estimate: &BinaryGraph) -> Result<()> {
    if truth.d() != estimate.d() {
        return Err(Error::dims(truth.d(), estimate.d()));
    }
    if truth.has_self_loop() || estimate.has_self_loop() {
        return Err(Error::Input(
            "adjacency matrices must have a zero diagonal".into(),
        ));
    }
    Ok(())
}

/// Missing, extra and reversed edges, each unordered pair counted at most once.
pub fn structural_hamming(truth: &BinaryGraph, estimate: &BinaryGraph) -> Result<usize> {
    check_pair(truth, estimate)?;
    let d = truth.d();
    let mut shd = 0;
    for i in 0..d {
        for j in i + 1..d {
            let t = (truth.has_edge(i, j), truth.has_edge(j, i));
            let e = (estimate.has_edge(i, j), estimate.has_edge(j, i));
            if t != e {
                shd += 1;
            }
        }
    }
    Ok(shd)
}

fn correct_edges(truth: &BinaryGraph, estimate: &BinaryGraph) -> usize {
    estimate
        .edges()
        .filter(|&(i, j)| truth.has_edge(i, j))
        .count()
}

/// `(tpr, fdr)`. An empty truth gives `tpr = 1`; no predictions give `fdr = 0`.
pub fn tpr_fdr(truth: &BinaryGraph, estimate: &BinaryGraph) -> Result<(f64, f64)> {
    check_pair(truth, estimate)?;
    let correct = correct_edges(truth, estimate);
    let n_true = truth.n_edges();
    let n_pred = estimate.n_edges();
    let tpr = if n_true == 0 {
        1.0
    } else {
        correct as f64 / n_true as f64
    };
    let fdr = (n_pred - correct) as f64 / n_pred.max(1) as f64;
    Ok((tpr, fdr))
}

/// All metrics. The truth must be acyclic; a cyclic estimate leaves `sid` unset.
pub fn evaluate(truth: &BinaryGraph, estimate: &BinaryGraph) -> Result<MetricsReport> {
    let shd = structural_hamming(truth, estimate)?;
    let (tpr, fdr) = tpr_fdr(truth, estimate)?;
    if !truth.is_acyclic() {
        return Err(Error::Cyclic("truth graph".into()));
    }
    let sid = if estimate.is_acyclic() {
        Some(sid(truth, estimate)?)
    } else {
        log::warn!("estimate is cyclic; SID is undefined");
        None
    };
    Ok(MetricsReport {
        tpr,
        fdr,
        shd,
        sid,
        n_predicted_edges: estimate.n_edges(),
        n_correct_edges: correct_edges(truth, estimate),
    })
}
