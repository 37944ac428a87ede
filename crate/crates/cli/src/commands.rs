//! Subcommand implementations.

use std::path::{Path, PathBuf};
use std::time::Instant;

use casper_core::graph::{BinaryGraph, GroundTruthDag, WeightedAdjacency};
use casper_core::io;
use casper_core::learner::{
    casper_fit, notears_fit, notears_mlp_fit, random_baseline, TrainResult,
};
use casper_core::metrics::{evaluate, MetricsReport};
use casper_core::sem::{
    sample_linear_weights, simulate_linear, simulate_nonlinear_gp, Dataset, Mechanism,
    NonlinearSemSpec,
};
use serde::Serialize;

use crate::cli::{EvalArgs, ExperimentArgs, FitArgs, IngestArgs};
use crate::config::resolve;
use crate::error::{CliError, Result};
use crate::ingest::ingest_csv;
use crate::manifest::{RunManifest, TrialTiming};
use crate::reference::sachs_canonical;
use crate::seeds::{self, Purpose};
use crate::spec::{ExperimentSpec, Method, SweepPoint};
use crate::tables::{self, TrialRecord};

pub const RANDOM_BASELINE_NOTE: &str =
    "random baseline: uniform random order, each forward pair kept with probability k*d / C(d,2)";

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Ground truth and data for one (trial, sweep point).
pub struct Simulation {
    pub dag: GroundTruthDag,
    pub weights: Option<WeightedAdjacency>,
    pub data: Dataset,
}

/// Graph, weights and the noise draw are shared by every noise mean of a
/// trial, so a noise sweep only moves the noise location.
pub fn simulate_point(
    spec: &ExperimentSpec,
    trial: usize,
    point: &SweepPoint,
) -> Result<Simulation> {
    let seed = |p| seeds::simulation(spec.seed, p, trial, point.degree_index);
    let dag = spec
        .graph_model(point.degree)?
        .generate(spec.nodes, seed(Purpose::Graph))?;
    match spec.mechanism {
        Mechanism::Linear => {
            let sem = sample_linear_weights(&dag, seed(Purpose::Weights))
                .with_noise(point.noise_mean, spec.noise_std)?;
            let data = simulate_linear(&sem, spec.samples, seed(Purpose::Data))?;
            Ok(Simulation {
                weights: Some(WeightedAdjacency::new(sem.coefficients.clone())?),
                dag,
                data,
            })
        }
        Mechanism::Gp => {
            let sem =
                NonlinearSemSpec::new(dag.clone()).with_noise(point.noise_mean, spec.noise_std)?;
            let data = simulate_nonlinear_gp(&sem, spec.samples, seed(Purpose::Data))?;
            Ok(Simulation {
                weights: None,
                dag,
                data,
            })
        }
    }
}

/// Runs one learner. The random baseline ignores the data and requests `k * d` edges.
pub fn run_method(
    spec: &ExperimentSpec,
    method: Method,
    data: &Dataset,
    degree: usize,
    seed: u64,
) -> Result<(BinaryGraph, Option<TrainResult>)> {
    let cfg = spec.learner_config(seed);
    let result = match method {
        Method::Casper => casper_fit(data, &cfg)?,
        Method::Notears => notears_fit(data, &cfg)?,
        Method::NotearsMlp => notears_mlp_fit(data, &spec.learner_config_mlp(seed))?,
        Method::Random => {
            let d = data.d();
            return Ok((random_baseline(d, (degree * d) as f64, seed)?, None));
        }
    };
    Ok((result.pruned.clone(), Some(result)))
}

/// Runs `f` over `items` on a pool of `jobs` workers, returning results in input order.
#[cfg(feature = "parallel")]
fn run_pool<T: Sync, R: Send>(
    jobs: usize,
    items: &[T],
    f: impl Fn(&T) -> R + Sync,
) -> Result<Vec<R>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {jobs} workers: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}

#[cfg(not(feature = "parallel"))]
fn run_pool<T: Sync, R: Send>(
    _jobs: usize,
    items: &[T],
    f: impl Fn(&T) -> R + Sync,
) -> Result<Vec<R>> {
    Ok(items.iter().map(f).collect())
}

pub fn simulate(args: &ExperimentArgs) -> Result<PathBuf> {
    let spec = resolve(args.config.as_deref(), args.overrides()?)?;
    let mut manifest = RunManifest::start("simulate", spec.semantic_json(), spec.seed);
    create_dir(&spec.out)?;
    let points = spec.sweep_points();
    let cells: Vec<(usize, SweepPoint)> = (0..spec.trials)
        .flat_map(|t| points.iter().map(move |p| (t, *p)))
        .collect();
    let outputs = run_pool(spec.jobs, &cells, |(trial, point)| -> Result<f64> {
        let start = Instant::now();
        let sim = simulate_point(&spec, *trial, point)?;
        let dir = spec.out.join(spec.setting_label(point));
        create_dir(&dir)?;
        let stem = format!("trial_{trial:03}");
        io::write_binary_csv(&dir.join(format!("{stem}_truth.csv")), sim.dag.adjacency())?;
        if let Some(w) = &sim.weights {
            io::write_weighted_csv(&dir.join(format!("{stem}_weights.csv")), w)?;
        }
        io::write_dataset_csv(&dir.join(format!("{stem}_data.csv")), &sim.data)?;
        Ok(start.elapsed().as_secs_f64())
    })?;
    for ((trial, point), out) in cells.iter().zip(outputs) {
        manifest.timings.push(TrialTiming {
            setting: spec.setting_label(point),
            trial: *trial,
            method: "simulate".into(),
            seed: seeds::simulation(spec.seed, Purpose::Data, *trial, point.degree_index),
            wall_time_seconds: out?,
            status: "ok".into(),
        });
    }
    manifest.finish();
    manifest.save(&spec.out.join("manifest.json"))?;
    Ok(spec.out)
}

#[derive(Debug, Serialize)]
struct FitSummary<'a> {
    method: &'a str,
    n_edges: usize,
    converged: Option<bool>,
    final_h: Option<f64>,
    metrics: Option<&'a MetricsReport>,
}

pub fn fit(args: &FitArgs) -> Result<PathBuf> {
    let e = &args.experiment;
    let mut spec = resolve(e.config.as_deref(), e.overrides()?)?;
    let method = match spec.methods.as_slice() {
        [m] => *m,
        _ if e.method.is_none() => Method::Casper,
        _ => return Err(CliError::Usage("fit takes exactly one --method".into())),
    };
    spec.methods = vec![method];
    let (data, _) = ingest_csv(&args.data, !args.no_standardize)?;
    let mut manifest = RunManifest::start("fit", spec.semantic_json(), spec.seed);
    manifest
        .notes
        .push(standardization_note(!args.no_standardize));
    if method == Method::Random {
        manifest.notes.push(RANDOM_BASELINE_NOTE.into());
    }
    create_dir(&spec.out)?;
    let start = Instant::now();
    let (pruned, result) = run_method(&spec, method, &data, spec.degrees[0], spec.seed)?;
    let elapsed = start.elapsed().as_secs_f64();
    match &result {
        Some(r) => r.save(&spec.out, method.name())?,
        None => io::write_binary_csv(
            &spec.out.join(format!("{}_pruned.csv", method.name())),
            &pruned,
        )?,
    }
    let metrics = match &args.truth {
        Some(path) => {
            let truth = io::read_binary_csv(path)?;
            let report = evaluate(&truth, &pruned)?;
            write_json(&spec.out.join("metrics.json"), &report)?;
            Some(report)
        }
        None => None,
    };
    manifest.timings.push(TrialTiming {
        setting: args.data.display().to_string(),
        trial: 0,
        method: method.name().into(),
        seed: spec.seed,
        wall_time_seconds: elapsed,
        status: "ok".into(),
    });
    manifest.finish();
    manifest.save(&spec.out.join("manifest.json"))?;
    let summary = FitSummary {
        method: method.name(),
        n_edges: pruned.n_edges(),
        converged: result.as_ref().map(|r| r.converged),
        final_h: result.as_ref().map(|r| r.final_h),
        metrics: metrics.as_ref(),
    };
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(spec.out)
}

fn standardization_note(on: bool) -> String {
    format!(
        "input columns {} to zero mean and unit variance",
        if on {
            "standardized"
        } else {
            "not standardized"
        }
    )
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn eval(args: &EvalArgs) -> Result<MetricsReport> {
    let truth = if args.truth.eq_ignore_ascii_case("sachs") {
        sachs_canonical()
    } else {
        io::read_binary_csv(Path::new(&args.truth))?
    };
    let estimate = io::read_binary_csv(&args.estimate)?;
    if truth.d() != estimate.d() {
        return Err(CliError::Input(format!(
            "truth has {} nodes but estimate has {}",
            truth.d(),
            estimate.d()
        )));
    }
    let report = evaluate(&truth, &estimate)?;
    if report.sid.is_none() {
        eprintln!("warning: estimate is cyclic; SID reported as null");
    }
    if let Some(dir) = &args.out {
        create_dir(dir)?;
        write_json(&dir.join("metrics.json"), &report)?;
    }
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(report)
}

pub fn ingest_check(args: &IngestArgs) -> Result<()> {
    let (_, report) = ingest_csv(&args.data, !args.no_standardize)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}

struct Job {
    trial: usize,
    point_index: usize,
    method: Method,
    seed: u64,
}

/// Full sweep. Failed fits are recorded per cell and the run continues.
pub fn bench(args: &ExperimentArgs) -> Result<Vec<TrialRecord>> {
    let spec = resolve(args.config.as_deref(), args.overrides()?)?;
    Ok(bench_spec(&spec)?.records)
}

/// Records in table order, each paired with its full training result
/// (`None` for the random baseline and failed fits).
pub struct BenchOutcome {
    pub records: Vec<TrialRecord>,
    pub results: Vec<Option<TrainResult>>,
}

pub fn bench_spec(spec: &ExperimentSpec) -> Result<BenchOutcome> {
    let mut manifest = RunManifest::start("bench", spec.semantic_json(), spec.seed);
    if spec.methods.contains(&Method::Random) {
        manifest.notes.push(RANDOM_BASELINE_NOTE.into());
    }
    manifest
        .notes
        .push("simulated data is used without standardization".into());
    create_dir(&spec.out)?;
    let points = spec.sweep_points();

    let cells: Vec<(usize, usize)> = (0..spec.trials)
        .flat_map(|t| (0..points.len()).map(move |p| (t, p)))
        .collect();
    let sims = run_pool(spec.jobs, &cells, |&(t, p)| {
        simulate_point(spec, t, &points[p])
    })?;
    let sims: Vec<Simulation> = sims.into_iter().collect::<Result<_>>()?;

    let mut jobs = Vec::new();
    for (cell, &(trial, point_index)) in cells.iter().enumerate() {
        debug_assert_eq!(cell, trial * points.len() + point_index);
        let p = &points[point_index];
        for &method in &spec.methods {
            let seed = seeds::method(spec.seed, trial, method, p.degree_index, p.noise_index);
            jobs.push(Job {
                trial,
                point_index,
                method,
                seed,
            });
        }
    }
    let outcomes = run_pool(spec.jobs, &jobs, |job| {
        let point = &points[job.point_index];
        let sim = &sims[job.trial * points.len() + job.point_index];
        let start = Instant::now();
        let outcome = run_method(spec, job.method, &sim.data, point.degree, job.seed)
            .and_then(|(g, r)| Ok((evaluate(sim.dag.adjacency(), &g)?, r)));
        let elapsed = start.elapsed().as_secs_f64();
        log::info!(
            "{} trial {} {}: {:.1}s",
            spec.setting_label(point),
            job.trial,
            job.method,
            elapsed
        );
        (outcome, elapsed)
    })?;

    let mut records = Vec::with_capacity(jobs.len());
    let mut results = Vec::with_capacity(jobs.len());
    for (job, (outcome, elapsed)) in jobs.iter().zip(outcomes) {
        let setting = spec.setting_label(&points[job.point_index]);
        let (record, result) = match outcome {
            Ok((report, result)) => (
                TrialRecord {
                    method: job.method.name().into(),
                    setting: setting.clone(),
                    trial: job.trial,
                    seed: job.seed,
                    report: Some(report),
                    converged: result.as_ref().map(|r| r.converged),
                    final_h: result.as_ref().map(|r| r.final_h),
                    error: None,
                },
                result,
            ),
            Err(e) => {
                log::warn!("{setting} trial {} {} failed: {e}", job.trial, job.method);
                let record = TrialRecord {
                    method: job.method.name().into(),
                    setting: setting.clone(),
                    trial: job.trial,
                    seed: job.seed,
                    report: None,
                    converged: None,
                    final_h: None,
                    error: Some(e.to_string()),
                };
                (record, None)
            }
        };
        manifest.timings.push(TrialTiming {
            setting,
            trial: job.trial,
            method: job.method.name().into(),
            seed: job.seed,
            wall_time_seconds: elapsed,
            status: if record.report.is_some() {
                "ok"
            } else {
                "failed"
            }
            .into(),
        });
        records.push(record);
        results.push(result);
    }
    // Method-major order groups each learner's rows together in the tables.
    let mut order: Vec<usize> = (0..jobs.len()).collect();
    order.sort_by_key(|&k| {
        let job = &jobs[k];
        let m = spec
            .methods
            .iter()
            .position(|&m| m == job.method)
            .unwrap_or(0);
        (m, job.point_index, job.trial)
    });
    let records: Vec<TrialRecord> = order.iter().map(|&k| records[k].clone()).collect();
    let mut results: Vec<Option<Option<TrainResult>>> = results.into_iter().map(Some).collect();
    let results: Vec<Option<TrainResult>> =
        order.iter().map(|&k| results[k].take().flatten()).collect();
    let rows = tables::write_all(&spec.out, &records)?;
    print!("{}", tables::aggregate_text(&rows));
    manifest.finish();
    manifest.save(&spec.out.join("manifest.json"))?;
    Ok(BenchOutcome { records, results })
}
