use casper_core::graph::{generate_er, BinaryGraph, GroundTruthDag};
use casper_core::sem::{
    rbf_kernel, sample_linear_weights, simulate_linear, simulate_nonlinear_gp, NonlinearSemSpec,
};
use nalgebra::DMatrix;
use statrs::distribution::{ContinuousCDF, Normal};

fn sample_cov(x: &DMatrix<f64>) -> DMatrix<f64> {
    let n = x.nrows() as f64;
    let means = x.row_mean();
    let centered = DMatrix::from_fn(x.nrows(), x.ncols(), |r, c| x[(r, c)] - means[c]);
    centered.transpose() * &centered / (n - 1.0)
}

/// Largest gap between the empirical CDF and `cdf`.
fn ks_statistic(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(k, &v)| {
            let f = cdf(v);
            (f - k as f64 / n).abs().max(((k + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn linear_covariance_matches_closed_form() {
    let dag = generate_er(6, 1, 11).unwrap();
    let spec = sample_linear_weights(&dag, 12)
        .with_noise(0.0, 1.0)
        .unwrap();
    let n = 100_000;
    let x = simulate_linear(&spec, n, 13).unwrap();
    // X = N (I - C)^{-1}  =>  Cov = (I - C)^{-T} (I - C)^{-1}
    let inv = (DMatrix::identity(6, 6) - &spec.coefficients)
        .try_inverse()
        .unwrap();
    let expected = inv.transpose() * &inv;
    let got = sample_cov(x.values());
    for i in 0..6 {
        for j in 0..6 {
            let scale = (expected[(i, i)] * expected[(j, j)]).sqrt();
            // Entry sd is at most scale * sqrt(2 / n); allow six of them.
            assert!(
                (got[(i, j)] - expected[(i, j)]).abs() <= 6.0 * scale * (2.0 / n as f64).sqrt(),
                "({i},{j}) {} vs {}",
                got[(i, j)],
                expected[(i, j)]
            );
        }
    }
}

#[test]
fn noise_mean_propagates_through_the_chain() {
    let dag =
        GroundTruthDag::from_graph(BinaryGraph::from_edges(3, &[(0, 1), (1, 2)]).unwrap()).unwrap();
    let spec = sample_linear_weights(&dag, 3).with_noise(0.6, 1.0).unwrap();
    let x = simulate_linear(&spec, 50_000, 4).unwrap();
    let c = &spec.coefficients;
    let m0 = 0.6;
    let m1 = 0.6 + c[(0, 1)] * m0;
    let m2 = 0.6 + c[(1, 2)] * m1;
    for (col, m) in [m0, m1, m2].iter().enumerate() {
        let got = x.values().column(col).mean();
        assert!(
            (got - m).abs() < 0.05 * (1.0 + m.abs()),
            "col {col}: {got} vs {m}"
        );
    }
}

#[test]
fn gp_root_nodes_are_gaussian() {
    let dag = generate_er(5, 1, 21).unwrap();
    let spec = NonlinearSemSpec::new(dag.clone())
        .with_noise(0.4, 1.0)
        .unwrap();
    let x = simulate_nonlinear_gp(&spec, 800, 22).unwrap();
    let normal = Normal::new(0.4, 1.0).unwrap();
    let critical = 1.95 / (800f64).sqrt();
    let roots: Vec<usize> = (0..5)
        .filter(|&j| dag.adjacency().parents(j).is_empty())
        .collect();
    assert!(!roots.is_empty());
    for j in roots {
        let col: Vec<f64> = x.values().column(j).iter().copied().collect();
        let ks = ks_statistic(&col, |v| normal.cdf(v));
        assert!(ks < critical, "root {j}: KS {ks} >= {critical}");
    }
}

#[test]
fn gp_child_variance_matches_kernel_expectation() {
    // Over GP draws, the centred sample variance of f has expectation
    // tr(K)/n - 1'K1/n^2 given the parent values.
    let n = 300;
    let mut excess = 0.0;
    let mut predicted = 0.0;
    let mut children = 0;
    for seed in 0..12u64 {
        let dag = generate_er(6, 2, 100 + seed).unwrap();
        let spec = NonlinearSemSpec::new(dag.clone());
        let x = simulate_nonlinear_gp(&spec, n, 200 + seed).unwrap();
        for j in 0..6 {
            let parents = dag.adjacency().parents(j);
            if parents.is_empty() {
                continue;
            }
            let col = x.values().column(j);
            let mean = col.mean();
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n as f64 - 1.0);
            let k = rbf_kernel(&x.values().select_columns(parents.iter()), 1.0);
            predicted += k.trace() / n as f64 - k.sum() / (n * n) as f64;
            excess += var - 1.0;
            children += 1;
        }
    }
    let (excess, predicted) = (excess / children as f64, predicted / children as f64);
    assert!(children >= 30);
    assert!(
        (excess - predicted).abs() < 0.2,
        "excess {excess} vs predicted {predicted}"
    );
}

#[test]
fn simulation_is_seed_deterministic() {
    let dag = generate_er(5, 2, 1).unwrap();
    let spec = NonlinearSemSpec::new(dag.clone());
    assert_eq!(
        simulate_nonlinear_gp(&spec, 50, 9).unwrap(),
        simulate_nonlinear_gp(&spec, 50, 9).unwrap()
    );
    assert_ne!(
        simulate_nonlinear_gp(&spec, 50, 9).unwrap(),
        simulate_nonlinear_gp(&spec, 50, 10).unwrap()
    );
    let lin = sample_linear_weights(&dag, 2);
    assert_eq!(
        simulate_linear(&lin, 50, 3).unwrap(),
        simulate_linear(&lin, 50, 3).unwrap()
    );
}
