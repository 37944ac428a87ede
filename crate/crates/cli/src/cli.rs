//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::Overrides;
use crate::error::Result;
use crate::spec::{parse_list, Method};

#[derive(Debug, Parser)]
#[command(
    name = "casper",
    version,
    about = "Simulate, fit, evaluate and benchmark DAG structure learners"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write ground-truth graphs and datasets for every trial and sweep point.
    Simulate(ExperimentArgs),
    /// Learn a graph from a dataset CSV.
    Fit(FitArgs),
    /// Compare an estimated adjacency against a ground truth.
    Eval(EvalArgs),
    /// Simulate, fit and evaluate across trials, methods and sweep axes.
    Bench(ExperimentArgs),
    /// Parse a dataset CSV and report its shape and column statistics.
    IngestCheck(IngestArgs),
}

/// Flags shared by every command that resolves an experiment.
#[derive(Debug, Args, Clone, Default)]
pub struct ExperimentArgs {
    /// TOML config file; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Graph family: er or sf.
    #[arg(long)]
    pub graph: Option<String>,
    /// Node degree k (k*d edges requested).
    #[arg(long)]
    pub degree: Option<usize>,
    /// Comma-separated degrees; overrides --degree.
    #[arg(long)]
    pub degree_sweep: Option<String>,
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long)]
    pub samples: Option<usize>,
    /// Data mechanism: linear or gp.
    #[arg(long)]
    pub mechanism: Option<String>,
    /// Comma-separated learners: casper, notears, notears-mlp, random.
    #[arg(long)]
    pub method: Option<String>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Comma-separated noise means.
    #[arg(long)]
    pub noise_mean: Option<String>,
    /// Pruning threshold.
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub lambda1: Option<f64>,
    /// Critic ascent steps per round.
    #[arg(long)]
    pub k_inner: Option<usize>,
    /// Worker threads for independent jobs.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct FitArgs {
    /// Dataset CSV with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Optional ground truth adjacency CSV; metrics are written when given.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Keep raw column scales instead of standardizing.
    #[arg(long)]
    pub no_standardize: bool,
    #[command(flatten)]
    pub experiment: ExperimentArgs,
}

#[derive(Debug, Args, Clone)]
pub struct EvalArgs {
    /// Ground truth adjacency CSV, or `sachs` for the built-in consensus network.
    #[arg(long)]
    pub truth: String,
    /// Estimated adjacency CSV.
    #[arg(long)]
    pub estimate: PathBuf,
    /// Directory for metrics.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Clone)]
pub struct IngestArgs {
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub no_standardize: bool,
}

impl ExperimentArgs {
    pub fn overrides(&self) -> Result<Overrides> {
        let degrees = match (&self.degree_sweep, self.degree) {
            (Some(list), _) => Some(parse_list::<usize>(list, "degree")?),
            (None, Some(k)) => Some(vec![k]),
            (None, None) => None,
        };
        let methods = match &self.method {
            Some(list) => Some(
                list.split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(str::parse::<Method>)
                    .collect::<Result<Vec<_>>>()?,
            ),
            None => None,
        };
        Ok(Overrides {
            graph: self.graph.as_deref().map(str::parse).transpose()?,
            degrees,
            nodes: self.nodes,
            samples: self.samples,
            mechanism: self.mechanism.as_deref().map(str::parse).transpose()?,
            noise_means: self
                .noise_mean
                .as_deref()
                .map(|s| parse_list(s, "noise-mean"))
                .transpose()?,
            methods,
            trials: self.trials,
            seed: self.seed,
            omega: self.omega,
            lambda1: self.lambda1,
            k_inner: self.k_inner,
            out: self.out.clone(),
            jobs: self.jobs,
        })
    }
}
