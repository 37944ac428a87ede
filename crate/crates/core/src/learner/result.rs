use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::CasperConfig;
use crate::error::{Error, Result};
use crate::graph::{BinaryGraph, WeightedAdjacency};
use crate::io;
use crate::nn::{Checkpoint, FittingModel};

/// State after one Lagrangian subproblem solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// Index of the solve, counting rejected (penalty-raising) attempts.
    pub outer: usize,
    /// L-BFGS iterations taken in this solve.
    pub iterations: usize,
    /// Critic rounds run during this solve (zero without a critic).
    pub critic_rounds: usize,
    /// Score without the DAG penalty: reconstruction + critic distance + regularizers.
    pub score: f64,
    pub h: f64,
    pub alpha: f64,
    pub mu: f64,
    /// `mean T(X) - mean T(X_hat)`; zero for least-squares learners.
    pub critic_distance: f64,
    /// At the start of the round where `max|phi| - log(1 + h)` was largest:
    /// the critic's largest parameter magnitude and the bound `log(1 + h)`.
    /// Both zero without a critic.
    pub critic_max_abs: f64,
    pub critic_bound: f64,
    /// Whether this solve met the progress condition (otherwise `mu` was raised).
    pub accepted: bool,
}

/// Outcome of a structure-learning run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrainResult {
    pub method: String,
    pub config: CasperConfig,
    pub weighted: WeightedAdjacencyRecord,
    pub pruned: BinaryGraph,
    pub history: Vec<EpochRecord>,
    pub final_h: f64,
    /// `h <= h_tolerance` at termination.
    pub converged: bool,
    /// Stopped because `mu` reached its cap.
    pub hit_mu_cap: bool,
    pub wall_time_seconds: f64,
    #[serde(skip)]
    pub model: Option<FittingModel>,
}

/// Serialized form of a weighted adjacency (row-major rows).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedAdjacencyRecord(pub Vec<Vec<f64>>);

impl From<&WeightedAdjacency> for WeightedAdjacencyRecord {
    fn from(w: &WeightedAdjacency) -> Self {
        let d = w.d();
        Self(
            (0..d)
                .map(|i| (0..d).map(|j| w.get(i, j)).collect())
                .collect(),
        )
    }
}

impl WeightedAdjacencyRecord {
    pub fn to_adjacency(&self) -> Result<WeightedAdjacency> {
        let d = self.0.len();
        let flat: Vec<f64> = self.0.iter().flatten().copied().collect();
        WeightedAdjacency::from_row_slice(d, &flat)
    }
}

impl TrainResult {
    pub fn weighted_adjacency(&self) -> WeightedAdjacency {
        self.weighted
            .to_adjacency()
            .expect("stored adjacency is square and finite")
    }

    /// Writes `<stem>.json`, `<stem>_weighted.csv`, `<stem>_pruned.csv` and,
    /// when the model is present, `<stem>_model.json`.
    pub fn save(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let json_path = dir.join(format!("{stem}.json"));
        std::fs::write(&json_path, serde_json::to_string_pretty(self)?)
            .map_err(|e| Error::io(&json_path, e))?;
        io::write_weighted_csv(
            &dir.join(format!("{stem}_weighted.csv")),
            &self.weighted_adjacency(),
        )?;
        io::write_binary_csv(&dir.join(format!("{stem}_pruned.csv")), &self.pruned)?;
        if let Some(model) = &self.model {
            Checkpoint::from_model(model).save(&dir.join(format!("{stem}_model.json")))?;
        }
        Ok(())
    }
}
