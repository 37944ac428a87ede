//! Synthetic data from linear and Gaussian-process structural equation models.

use std::collections::HashSet;

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::GroundTruthDag;

/// Largest sample count accepted by the GP simulator (kernel is `n x n`).
pub const GP_MAX_SAMPLES: usize = 10_000;
const GP_JITTER_START: f64 = 1e-6;
const GP_JITTER_MAX: f64 = 1e-3;

/// Observation matrix with one named column per variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: DMatrix<f64>,
    names: Vec<String>,
}

impl Dataset {
    pub fn new(values: DMatrix<f64>, names: Vec<String>) -> Result<Self> {
        if names.len() != values.ncols() {
            return Err(Error::dims(
                format!("{} names", values.ncols()),
                format!("{} names", names.len()),
            ));
        }
        let unique: HashSet<&str> = names.iter().map(String::as_str).collect();
        if unique.len() != names.len() {
            return Err(Error::Input("variable names must be unique".into()));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            let (row, col) = (pos % values.nrows().max(1), pos / values.nrows().max(1));
            return Err(Error::Input(format!(
                "non-finite value at row {row}, column {col}"
            )));
        }
        Ok(Self { values, names })
    }

    /// Columns named `X1..Xd`.
    pub fn with_default_names(values: DMatrix<f64>) -> Result<Self> {
        let names = default_names(values.ncols());
        Self::new(values, names)
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn d(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Zero mean and unit variance per column. Constant columns are only centered.
    pub fn standardized(&self) -> Dataset {
        let n = self.n() as f64;
        let mut values = self.values.clone();
        for mut col in values.column_iter_mut() {
            let mean = col.sum() / n;
            col.add_scalar_mut(-mean);
            let var = col.norm_squared() / n;
            if var > 0.0 {
                col /= var.sqrt();
            }
        }
        Dataset {
            values,
            names: self.names.clone(),
        }
    }

    /// Rows reordered by `perm` (row `r` of the result is row `perm[r]`).
    pub fn permute_rows(&self, perm: &[usize]) -> Result<Dataset> {
        if perm.len() != self.n() {
            return Err(Error::dims(self.n(), perm.len()));
        }
        let values = DMatrix::from_fn(self.n(), self.d(), |r, c| self.values[(perm[r], c)]);
        Ok(Dataset {
            values,
            names: self.names.clone(),
        })
    }
}

pub fn default_names(d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("X{i}")).collect()
}

/// Linear SEM `X_j = sum_i C_ij X_i + N_j`, `N_j ~ N(noise_mean, noise_std^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSemSpec {
    pub dag: GroundTruthDag,
    pub coefficients: DMatrix<f64>,
    pub noise_mean: f64,
    pub noise_std: f64,
}

impl LinearSemSpec {
    pub fn new(
        dag: GroundTruthDag,
        coefficients: DMatrix<f64>,
        noise_mean: f64,
        noise_std: f64,
    ) -> Result<Self> {
        let d = dag.d();
        if coefficients.shape() != (d, d) {
            return Err(Error::dims(
                format!("{d}x{d}"),
                format!("{}x{}", coefficients.nrows(), coefficients.ncols()),
            ));
        }
        for i in 0..d {
            for j in 0..d {
                let c = coefficients[(i, j)];
                if !c.is_finite() {
                    return Err(Error::Input(format!(
                        "coefficient ({i}, {j}) is not finite"
                    )));
                }
                if c != 0.0 && !dag.adjacency().has_edge(i, j) {
                    return Err(Error::Input(format!(
                        "coefficient ({i}, {j}) set on a non-edge"
                    )));
                }
            }
        }
        validate_noise(noise_mean, noise_std)?;
        Ok(Self {
            dag,
            coefficients,
            noise_mean,
            noise_std,
        })
    }

    pub fn with_noise(mut self, noise_mean: f64, noise_std: f64) -> Result<Self> {
        validate_noise(noise_mean, noise_std)?;
        self.noise_mean = noise_mean;
        self.noise_std = noise_std;
        Ok(self)
    }
}

fn validate_noise(mean: f64, std: f64) -> Result<()> {
    if !mean.is_finite() || !(std > 0.0) || !std.is_finite() {
        return Err(Error::Parameter(format!(
            "noise needs finite mean and positive std, got N({mean}, {std}^2)"
        )));
    }
    Ok(())
}

/// Additive-noise SEM whose mechanisms are Gaussian-process draws with an RBF kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearSemSpec {
    pub dag: GroundTruthDag,
    pub kernel_bandwidth: f64,
    pub noise_mean: f64,
    pub noise_std: f64,
}

impl NonlinearSemSpec {
    /// Unit bandwidth, standard normal noise.
    pub fn new(dag: GroundTruthDag) -> Self {
        Self {
            dag,
            kernel_bandwidth: 1.0,
            noise_mean: 0.0,
            noise_std: 1.0,
        }
    }

    pub fn with_noise(mut self, noise_mean: f64, noise_std: f64) -> Result<Self> {
        validate_noise(noise_mean, noise_std)?;
        self.noise_mean = noise_mean;
        self.noise_std = noise_std;
        Ok(self)
    }

    pub fn with_bandwidth(mut self, bandwidth: f64) -> Result<Self> {
        if !(bandwidth > 0.0) || !bandwidth.is_finite() {
            return Err(Error::Parameter(format!(
                "kernel bandwidth must be positive, got {bandwidth}"
            )));
        }
        self.kernel_bandwidth = bandwidth;
        Ok(self)
    }
}

/// Data-generating mechanism of a simulation setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mechanism {
    Linear,
    Gp,
}

impl std::str::FromStr for Mechanism {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(Mechanism::Linear),
            "gp" | "nonlinear" | "nonlinear-gp" => Ok(Mechanism::Gp),
            other => Err(Error::Parameter(format!("unknown mechanism '{other}'"))),
        }
    }
}

impl std::fmt::Display for Mechanism {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Mechanism::Linear => "linear",
            Mechanism::Gp => "gp",
        })
    }
}

/// Edge weights drawn from `U(-2, -0.5) ∪ U(0.5, 2)`, standard normal noise.
pub fn sample_linear_weights(dag: &GroundTruthDag, seed: u64) -> LinearSemSpec {
    let d = dag.d();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coefficients = DMatrix::zeros(d, d);
    for (i, j) in dag.adjacency().edges() {
        let magnitude = rng.random_range(0.5..2.0);
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        coefficients[(i, j)] = sign * magnitude;
    }
    LinearSemSpec {
        dag: dag.clone(),
        coefficients,
        noise_mean: 0.0,
        noise_std: 1.0,
    }
}

fn check_samples(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Parameter("sample count must be at least 1".into()));
    }
    Ok(())
}

fn noise_column(n: usize, mean: f64, std: f64, rng: &mut ChaCha8Rng) -> DVector<f64> {
    DVector::from_fn(n, |_, _| {
        let z: f64 = StandardNormal.sample(rng);
        mean + std * z
    })
}

/// Sample `n` rows of a linear SEM, visiting nodes in topological order.
pub fn simulate_linear(spec: &LinearSemSpec, n: usize, seed: u64) -> Result<Dataset> {
    check_samples(n)?;
    let dag = &spec.dag;
    if !dag.adjacency().is_acyclic() {
        return Err(Error::Cyclic("linear SEM graph".into()));
    }
    let d = dag.d();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = DMatrix::zeros(n, d);
    for &j in dag.order() {
        let mut col = noise_column(n, spec.noise_mean, spec.noise_std, &mut rng);
        for i in dag.adjacency().parents(j) {
            let c = spec.coefficients[(i, j)];
            if c != 0.0 {
                col.axpy(c, &x.column(i), 1.0);
            }
        }
        x.set_column(j, &col);
    }
    Dataset::with_default_names(x)
}

/// `exp(-||a - b||^2 / (2 bandwidth^2))` over the rows of `inputs`.
pub fn rbf_kernel(inputs: &DMatrix<f64>, bandwidth: f64) -> DMatrix<f64> {
    let n = inputs.nrows();
    let scale = -0.5 / (bandwidth * bandwidth);
    let mut k = DMatrix::zeros(n, n);
    for a in 0..n {
        k[(a, a)] = 1.0;
        for b in 0..a {
            let sq: f64 = inputs
                .row(a)
                .iter()
                .zip(inputs.row(b).iter())
                .map(|(x, y)| (x - y) * (x - y))
                .sum();
            let v = (scale * sq).exp();
            k[(a, b)] = v;
            k[(b, a)] = v;
        }
    }
    k
}

/// Lower Cholesky factor of `kernel + jitter I`, escalating jitter by 10x up to 1e-3.
fn jittered_cholesky(kernel: DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = kernel.nrows();
    let mut jitter = GP_JITTER_START;
    loop {
        let mut k = kernel.clone();
        for i in 0..n {
            k[(i, i)] += jitter;
        }
        if let Some(chol) = Cholesky::new(k) {
            return Ok(chol.unpack());
        }
        jitter *= 10.0;
        if jitter > GP_JITTER_MAX * (1.0 + 1e-9) {
            return Err(Error::Numerical(format!(
                "RBF kernel not positive definite with jitter up to {GP_JITTER_MAX}"
            )));
        }
        log::debug!("kernel factorization failed, retrying with jitter {jitter:e}");
    }
}

/// Sample `n` rows of an additive-noise SEM with GP mechanisms.
///
/// Each non-root node's function values are drawn jointly at the observed
/// parent inputs from `N(0, K + jitter I)`; roots are pure noise.
pub fn simulate_nonlinear_gp(spec: &NonlinearSemSpec, n: usize, seed: u64) -> Result<Dataset> {
    check_samples(n)?;
    if n > GP_MAX_SAMPLES {
        return Err(Error::Parameter(format!(
            "GP simulation supports at most {GP_MAX_SAMPLES} samples, got {n}"
        )));
    }
    validate_noise(spec.noise_mean, spec.noise_std)?;
    if !(spec.kernel_bandwidth > 0.0) {
        return Err(Error::Parameter("kernel bandwidth must be positive".into()));
    }
    let dag = &spec.dag;
    if !dag.adjacency().is_acyclic() {
        return Err(Error::Cyclic("GP SEM graph".into()));
    }
    let d = dag.d();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = DMatrix::zeros(n, d);
    for &j in dag.order() {
        let parents = dag.adjacency().parents(j);
        let mut col = noise_column(n, spec.noise_mean, spec.noise_std, &mut rng);
        if !parents.is_empty() {
            let inputs = x.select_columns(parents.iter());
            let chol = jittered_cholesky(rbf_kernel(&inputs, spec.kernel_bandwidth))?;
            let z = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
            col += chol * z;
        }
        x.set_column(j, &col);
    }
    Dataset::with_default_names(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_er, BinaryGraph};

    fn chain(d: usize) -> GroundTruthDag {
        let edges: Vec<_> = (0..d - 1).map(|i| (i, i + 1)).collect();
        GroundTruthDag::from_graph(BinaryGraph::from_edges(d, &edges).unwrap()).unwrap()
    }

    #[test]
    fn empty_dag_gets_zero_coefficients() {
        let dag = GroundTruthDag::from_graph(BinaryGraph::empty(5)).unwrap();
        let spec = sample_linear_weights(&dag, 1);
        assert!(spec.coefficients.iter().all(|&c| c == 0.0));
    }

    #[test]
    fn coefficient_magnitudes() {
        let mut all = Vec::new();
        let mut seed = 0;
        while all.len() < 10_000 {
            let dag = generate_er(10, 4, seed).unwrap();
            let spec = sample_linear_weights(&dag, seed + 1000);
            for (i, j) in dag.adjacency().edges() {
                all.push(spec.coefficients[(i, j)]);
            }
            // support never leaks off the graph
            for i in 0..10 {
                for j in 0..10 {
                    if !dag.adjacency().has_edge(i, j) {
                        assert_eq!(spec.coefficients[(i, j)], 0.0);
                    }
                }
            }
            seed += 1;
        }
        assert!(all.iter().all(|c| (0.5..=2.0).contains(&c.abs())));
        let mean_abs = all.iter().map(|c| c.abs()).sum::<f64>() / all.len() as f64;
        assert!((1.22..=1.28).contains(&mean_abs), "{mean_abs}");
    }

    #[test]
    fn pure_noise_columns_match_clt_bounds() {
        let dag = GroundTruthDag::from_graph(BinaryGraph::empty(3)).unwrap();
        let spec = LinearSemSpec::new(dag, DMatrix::zeros(3, 3), 0.0, 1.0).unwrap();
        let data = simulate_linear(&spec, 50_000, 9).unwrap();
        for col in data.values().column_iter() {
            let mean = col.mean();
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 50_000.0;
            assert!(mean.abs() <= 0.02, "mean {mean}");
            assert!((0.97..=1.03).contains(&var), "var {var}");
        }
    }

    #[test]
    fn two_node_slope_is_recovered() {
        let dag = chain(2);
        let mut c = DMatrix::zeros(2, 2);
        c[(0, 1)] = 1.5;
        let spec = LinearSemSpec::new(dag, c, 0.0, 1.0).unwrap();
        let data = simulate_linear(&spec, 10_000, 4).unwrap();
        let x = data.values().column(0);
        let y = data.values().column(1);
        let (mx, my) = (x.mean(), y.mean());
        let cov: f64 = x
            .iter()
            .zip(y.iter())
            .map(|(a, b)| (a - mx) * (b - my))
            .sum();
        let var: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
        let slope = cov / var;
        assert!((1.45..=1.55).contains(&slope), "slope {slope}");
    }

    #[test]
    fn linear_shape_and_determinism() {
        let dag = generate_er(10, 2, 3).unwrap();
        let spec = sample_linear_weights(&dag, 4);
        let a = simulate_linear(&spec, 2000, 5).unwrap();
        assert_eq!((a.n(), a.d()), (2000, 10));
        assert_eq!(a, simulate_linear(&spec, 2000, 5).unwrap());
        assert!(simulate_linear(&spec, 0, 5).is_err());
    }

    #[test]
    fn linear_spec_rejects_off_support() {
        let dag = chain(2);
        let mut c = DMatrix::zeros(2, 2);
        c[(1, 0)] = 1.0;
        assert!(LinearSemSpec::new(dag, c, 0.0, 1.0).is_err());
    }

    #[test]
    fn gp_chain_deterministic() {
        let spec = NonlinearSemSpec::new(chain(2));
        let a = simulate_nonlinear_gp(&spec, 300, 11).unwrap();
        let b = simulate_nonlinear_gp(&spec, 300, 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, simulate_nonlinear_gp(&spec, 300, 12).unwrap());
    }

    #[test]
    fn gp_rejects_bad_sizes() {
        let spec = NonlinearSemSpec::new(chain(2));
        assert!(simulate_nonlinear_gp(&spec, 0, 1).is_err());
        assert!(simulate_nonlinear_gp(&spec, GP_MAX_SAMPLES + 1, 1).is_err());
        assert!(NonlinearSemSpec::new(chain(2)).with_bandwidth(0.0).is_err());
    }

    #[test]
    fn rbf_kernel_entries() {
        let inputs = DMatrix::from_row_slice(2, 1, &[0.0, 1.0]);
        let k = rbf_kernel(&inputs, 1.0);
        assert_eq!(k[(0, 0)], 1.0);
        assert!((k[(0, 1)] - (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn standardize_gives_unit_columns() {
        let values = DMatrix::from_row_slice(3, 2, &[1.0, 5.0, 2.0, 5.0, 3.0, 5.0]);
        let data = Dataset::with_default_names(values).unwrap().standardized();
        let c0 = data.values().column(0);
        assert!(c0.mean().abs() < 1e-15);
        assert!((c0.norm_squared() / 3.0 - 1.0).abs() < 1e-12);
        assert!(data.values().column(1).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dataset_validation() {
        let m = DMatrix::from_row_slice(1, 2, &[1.0, 2.0]);
        assert!(Dataset::new(m.clone(), vec!["a".into(), "a".into()]).is_err());
        assert!(Dataset::new(m.clone(), vec!["a".into()]).is_err());
        let bad = DMatrix::from_row_slice(1, 2, &[1.0, f64::NAN]);
        assert!(Dataset::with_default_names(bad).is_err());
    }
}
