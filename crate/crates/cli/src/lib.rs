//! Reproduction harness: experiment configuration, simulation, learner
//! orchestration, metrics tables and run manifests.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod ingest;
pub mod manifest;
pub mod reference;
pub mod seeds;
pub mod spec;
pub mod tables;

pub use error::{exit, CliError, Result};

use cli::{Cli, Command};

/// Runs a parsed command line.
pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => commands::simulate(&args).map(drop),
        Command::Fit(args) => commands::fit(&args).map(drop),
        Command::Eval(args) => commands::eval(&args).map(drop),
        Command::Bench(args) => commands::bench(&args).map(drop),
        Command::IngestCheck(args) => commands::ingest_check(&args),
    }
}
