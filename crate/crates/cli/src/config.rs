//! TOML experiment files and command-line overrides.
//!
//! ```toml
//! [experiment]
//! graph = "er"
//! degrees = [2]
//! nodes = 10
//! samples = 2000
//! mechanism = "linear"
//! noise_means = [0.0]
//! methods = ["casper", "notears"]
//! trials = 10
//! seed = 0
//!
//! [learner]
//! lambda1 = 0.01
//! k_inner = 3
//! ```

use std::path::{Path, PathBuf};

use casper_core::graph::GraphScheme;
use casper_core::learner::CasperConfig;
use casper_core::sem::Mechanism;
use serde::Deserialize;

use crate::error::{CliError, Result};
use crate::spec::{ExperimentSpec, Method};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub experiment: ExperimentSection,
    /// Learner hyperparameters; unspecified keys keep the mechanism's defaults.
    pub learner: Option<toml::Table>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub graph: Option<GraphScheme>,
    pub degrees: Option<Vec<usize>>,
    pub nodes: Option<usize>,
    pub samples: Option<usize>,
    pub mechanism: Option<Mechanism>,
    pub noise_means: Option<Vec<f64>>,
    pub noise_std: Option<f64>,
    pub methods: Option<Vec<Method>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub mlp_hidden: Option<usize>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

/// Values given on the command line; `None` leaves the file/default value.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub graph: Option<GraphScheme>,
    pub degrees: Option<Vec<usize>>,
    pub nodes: Option<usize>,
    pub samples: Option<usize>,
    pub mechanism: Option<Mechanism>,
    pub noise_means: Option<Vec<f64>>,
    pub methods: Option<Vec<Method>>,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub omega: Option<f64>,
    pub lambda1: Option<f64>,
    pub k_inner: Option<usize>,
    pub out: Option<PathBuf>,
    pub jobs: Option<usize>,
}

impl ConfigFile {
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let file: Self = toml::from_str(text).map_err(|e| config_error(path, e))?;
        if let Some(table) = &file.learner {
            CasperConfig::deserialize(toml::Value::Table(table.clone()))
                .map_err(|e| config_error(path, e))?;
        }
        Ok(file)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn apply(self, spec: &mut ExperimentSpec) {
        if let Some(table) = self.learner {
            let mut merged =
                toml::Table::try_from(&spec.learner).expect("learner config serializes to a table");
            merged.extend(table);
            spec.learner = CasperConfig::deserialize(toml::Value::Table(merged))
                .expect("validated at parse time");
        }
        let e = self.experiment;
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(v) = e.$field { spec.$field = v; } )* };
        }
        set!(
            graph,
            degrees,
            nodes,
            samples,
            mechanism,
            noise_means,
            noise_std,
            methods,
            trials,
            seed,
            mlp_hidden,
            out,
            jobs
        );
    }
}

impl Overrides {
    pub fn apply(self, spec: &mut ExperimentSpec) {
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(v) = self.$field { spec.$field = v; } )* };
        }
        set!(
            graph,
            degrees,
            nodes,
            samples,
            mechanism,
            noise_means,
            methods,
            trials,
            seed,
            out,
            jobs
        );
        if let Some(v) = self.omega {
            spec.learner.omega = v;
        }
        if let Some(v) = self.lambda1 {
            spec.learner.lambda1 = v;
        }
        if let Some(v) = self.k_inner {
            spec.learner.k_inner = v;
        }
    }
}

/// Defaults, then the config file, then command-line flags.
pub fn resolve(config: Option<&Path>, overrides: Overrides) -> Result<ExperimentSpec> {
    let file = config.map(ConfigFile::load).transpose()?;
    let mechanism = overrides
        .mechanism
        .or(file.as_ref().and_then(|f| f.experiment.mechanism))
        .unwrap_or(Mechanism::Linear);
    let mut spec = ExperimentSpec::for_mechanism(mechanism);
    if let Some(file) = file {
        file.apply(&mut spec);
    }
    overrides.apply(&mut spec);
    spec.validate()?;
    Ok(spec)
}

fn config_error(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}
