//! Public learner entry points.

use super::config::{CasperConfig, ModelKind};
use super::result::TrainResult;
use super::train::Engine;
use crate::error::{Error, Result};
use crate::graph::{random_dag, BinaryGraph};
use crate::sem::Dataset;

/// Learn a DAG with the critic-augmented bilevel scheme.
///
/// After `pretrain_epochs` steps on the score alone, every fitting-model
/// step is preceded by `k_inner` critic ascent steps whose parameters are
/// clipped to `±log(1 + h)`. Lagrangian coefficients follow the NOTEARS
/// dual-ascent schedule in `config.lagrangian`.
pub fn casper_fit(x: &Dataset, config: &CasperConfig) -> Result<TrainResult> {
    Engine::new(x, config, true)?.run("casper")
}

/// Linear NOTEARS: least squares with L1 under the exponential trace constraint.
pub fn notears_fit(x: &Dataset, config: &CasperConfig) -> Result<TrainResult> {
    let cfg = CasperConfig {
        model: ModelKind::Linear,
        ..config.clone()
    };
    Engine::new(x, &cfg, false)?.run("notears")
}

/// NOTEARS-MLP: per-node MLPs whose first-layer weights carry the graph.
pub fn notears_mlp_fit(x: &Dataset, config: &CasperConfig) -> Result<TrainResult> {
    let cfg = match config.model {
        ModelKind::Mlp { .. } => config.clone(),
        ModelKind::Linear => CasperConfig {
            model: ModelKind::Mlp { hidden: 10 },
            ..config.clone()
        },
    };
    Engine::new(x, &cfg, false)?.run("notears-mlp")
}

/// Uniformly ordered random DAG with `expected_edges` edges in expectation.
pub fn random_baseline(d: usize, expected_edges: f64, seed: u64) -> Result<BinaryGraph> {
    if d == 0 {
        return Err(Error::Parameter("random baseline needs d >= 1".into()));
    }
    if d == 1 {
        return Ok(BinaryGraph::empty(1));
    }
    Ok(random_dag(d, expected_edges, seed)?.adjacency().clone())
}
