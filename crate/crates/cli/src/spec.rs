//! Experiment description: what to simulate, which learners to run, how
//! many trials, and the sweep axes.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use casper_core::graph::{GraphModel, GraphScheme};
use casper_core::learner::{CasperConfig, ModelKind};
use casper_core::sem::Mechanism;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Casper,
    Notears,
    NotearsMlp,
    Random,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Casper,
        Method::Notears,
        Method::NotearsMlp,
        Method::Random,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Casper => "casper",
            Method::Notears => "notears",
            Method::NotearsMlp => "notears-mlp",
            Method::Random => "random",
        }
    }

    /// Stable small integer used in seed derivation.
    pub fn code(self) -> u64 {
        match self {
            Method::Casper => 0,
            Method::Notears => 1,
            Method::NotearsMlp => 2,
            Method::Random => 3,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| {
                CliError::Usage(format!(
                    "unknown method {s:?}; expected one of casper, notears, notears-mlp, random"
                ))
            })
    }
}

/// One point of the sweep grid: an edge density and a noise mean.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub degree: usize,
    pub noise_mean: f64,
    /// Position of `degree` in the density list.
    pub degree_index: usize,
    pub noise_index: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub graph: GraphScheme,
    /// Density sweep (node degrees); a single entry when not sweeping.
    pub degrees: Vec<usize>,
    pub nodes: usize,
    pub samples: usize,
    pub mechanism: Mechanism,
    /// Noise-mean sweep; a single entry when not sweeping.
    pub noise_means: Vec<f64>,
    pub noise_std: f64,
    pub methods: Vec<Method>,
    pub trials: usize,
    pub seed: u64,
    /// Learner hyperparameters. The fitting-model family follows the mechanism.
    pub learner: CasperConfig,
    /// Hidden width of the MLP fitting model used on nonlinear data.
    pub mlp_hidden: usize,
    /// Output directory; not part of the semantic configuration.
    #[serde(skip)]
    pub out: PathBuf,
    /// Worker count; not part of the semantic configuration.
    #[serde(skip)]
    pub jobs: usize,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            graph: GraphScheme::Er,
            degrees: vec![2],
            nodes: 10,
            samples: 2000,
            mechanism: Mechanism::Linear,
            noise_means: vec![0.0],
            noise_std: 1.0,
            methods: vec![Method::Casper, Method::Notears],
            trials: 10,
            seed: 0,
            learner: CasperConfig::default(),
            mlp_hidden: 10,
            out: PathBuf::from("runs"),
            jobs: 1,
        }
    }
}

impl ExperimentSpec {
    /// Defaults with the learner hyperparameters suited to `mechanism`.
    pub fn for_mechanism(mechanism: Mechanism) -> Self {
        let learner = match mechanism {
            Mechanism::Linear => CasperConfig::default(),
            Mechanism::Gp => CasperConfig::nonlinear(),
        };
        Self {
            mechanism,
            learner,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(CliError::Usage("trials must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(CliError::Usage("at least one method is required".into()));
        }
        if self.nodes == 0 || self.samples == 0 {
            return Err(CliError::Usage("nodes and samples must be positive".into()));
        }
        if self.degrees.is_empty() || self.noise_means.is_empty() {
            return Err(CliError::Usage(
                "degree and noise-mean lists must be non-empty".into(),
            ));
        }
        if self.degrees.contains(&0) {
            return Err(CliError::Usage("degrees must be positive".into()));
        }
        if self.noise_means.iter().any(|m| !m.is_finite()) || !(self.noise_std > 0.0) {
            return Err(CliError::Usage(
                "noise means must be finite and noise_std positive".into(),
            ));
        }
        if self.mlp_hidden == 0 || self.jobs == 0 {
            return Err(CliError::Usage(
                "mlp_hidden and jobs must be positive".into(),
            ));
        }
        if self.degrees.len() > 1 << 8 || self.noise_means.len() > 1 << 8 || self.trials > 1 << 20 {
            return Err(CliError::Usage(
                "sweep lists are limited to 256 points and trials to 2^20".into(),
            ));
        }
        self.learner.validate()?;
        Ok(())
    }

    pub fn graph_model(&self, degree: usize) -> Result<GraphModel> {
        Ok(GraphModel::new(self.graph, degree)?)
    }

    /// Learner config for one fit, with the model family chosen by mechanism.
    pub fn learner_config(&self, seed: u64) -> CasperConfig {
        let model = match self.mechanism {
            Mechanism::Linear => ModelKind::Linear,
            Mechanism::Gp => ModelKind::Mlp {
                hidden: self.mlp_hidden,
            },
        };
        CasperConfig {
            model,
            seed,
            ..self.learner.clone()
        }
    }

    /// Learner config with the MLP fitting model regardless of mechanism.
    pub fn learner_config_mlp(&self, seed: u64) -> CasperConfig {
        CasperConfig {
            model: ModelKind::Mlp {
                hidden: self.mlp_hidden,
            },
            seed,
            ..self.learner.clone()
        }
    }

    pub fn sweep_points(&self) -> Vec<SweepPoint> {
        let mut points = Vec::new();
        for (degree_index, &degree) in self.degrees.iter().enumerate() {
            for (noise_index, &noise_mean) in self.noise_means.iter().enumerate() {
                points.push(SweepPoint {
                    degree,
                    noise_mean,
                    degree_index,
                    noise_index,
                });
            }
        }
        points
    }

    /// Row label for a sweep point, e.g. `ER2-d10-n2000-linear-mu0`.
    pub fn setting_label(&self, point: &SweepPoint) -> String {
        format!(
            "{}{}-d{}-n{}-{}-mu{}",
            self.graph, point.degree, self.nodes, self.samples, self.mechanism, point.noise_mean
        )
    }

    /// Canonical JSON of every field that affects results (sorted keys).
    pub fn semantic_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("spec serializes")
    }
}

/// Parses a comma-separated list, e.g. `0.2,0.4,1`.
pub fn parse_list<T: FromStr>(text: &str, what: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<T>()
                .map_err(|_| CliError::Usage(format!("invalid {what} list entry {s:?}")))
        })
        .collect::<Result<Vec<T>>>()
        .and_then(|v| {
            if v.is_empty() {
                Err(CliError::Usage(format!("empty {what} list")))
            } else {
                Ok(v)
            }
        })
}
