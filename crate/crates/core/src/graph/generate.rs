//! Random DAG generators: Erdős–Rényi and Barabási–Albert scale-free.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BinaryGraph, GroundTruthDag};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphScheme {
    Er,
    Sf,
}

impl fmt::Display for GraphScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphScheme::Er => "ER",
            GraphScheme::Sf => "SF",
        })
    }
}

impl FromStr for GraphScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "er" => Ok(GraphScheme::Er),
            "sf" => Ok(GraphScheme::Sf),
            other => Err(Error::Parameter(format!("unknown graph scheme '{other}'"))),
        }
    }
}

/// Random graph family plus degree `k`; `k * d` edges are requested.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GraphModel {
    pub scheme: GraphScheme,
    pub degree: usize,
}

impl GraphModel {
    pub fn new(scheme: GraphScheme, degree: usize) -> Result<Self> {
        if degree == 0 {
            return Err(Error::Parameter("graph degree must be at least 1".into()));
        }
        Ok(Self { scheme, degree })
    }

    pub fn requested_edges(&self, d: usize) -> usize {
        self.degree * d
    }

    pub fn generate(&self, d: usize, seed: u64) -> Result<GroundTruthDag> {
        match self.scheme {
            GraphScheme::Er => generate_er(d, self.degree, seed),
            GraphScheme::Sf => generate_sf(d, self.degree, seed),
        }
    }
}

impl fmt::Display for GraphModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.scheme, self.degree)
    }
}

fn max_dag_edges(d: usize) -> usize {
    d * d.saturating_sub(1) / 2
}

/// Include each forward pair of a uniform random order with probability `p`.
fn sample_ordered(d: usize, p: f64, rng: &mut ChaCha8Rng) -> Result<GroundTruthDag> {
    let mut order: Vec<usize> = (0..d).collect();
    order.shuffle(rng);
    let mut g = BinaryGraph::empty(d);
    for a in 0..d {
        for b in (a + 1)..d {
            if rng.random::<f64>() < p {
                g.set(order[a], order[b], true);
            }
        }
    }
    GroundTruthDag::new(g, order)
}

/// Erdős–Rényi DAG with `k * d` edges in expectation.
///
/// Each pair that is forward in a uniform random node order is included
/// independently with probability `min(1, k d / (d (d-1) / 2))`. Requests
/// beyond `d (d-1)` edges (one per ordered pair) are rejected.
pub fn generate_er(d: usize, k: usize, seed: u64) -> Result<GroundTruthDag> {
    if d < 2 {
        return Err(Error::Parameter(format!("ER graph needs d >= 2, got {d}")));
    }
    if k == 0 || k * d > d * (d - 1) {
        return Err(Error::Parameter(format!(
            "ER degree {k} infeasible for d={d}: {} edges requested, at most {} possible",
            k * d,
            max_dag_edges(d)
        )));
    }
    let p = (k * d) as f64 / max_dag_edges(d) as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_ordered(d, p.min(1.0), &mut rng)
}

/// Random DAG with a given expected edge count, used as the structure-free baseline.
pub fn random_dag(d: usize, expected_edges: f64, seed: u64) -> Result<GroundTruthDag> {
    let max = max_dag_edges(d);
    if !(expected_edges >= 0.0) || expected_edges > max as f64 {
        return Err(Error::Parameter(format!(
            "expected edge count {expected_edges} outside [0, {max}] for d={d}"
        )));
    }
    let p = if max == 0 {
        0.0
    } else {
        expected_edges / max as f64
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_ordered(d, p, &mut rng)
}

/// Scale-free DAG by Barabási–Albert preferential attachment.
///
/// Starts from a star on `k + 1` nodes; every later node attaches to `k`
/// distinct existing nodes drawn proportionally to degree, for `k (d - k)`
/// edges in total. Edges point from the arriving node to its targets, and
/// the nodes are then relabelled uniformly at random.
pub fn generate_sf(d: usize, k: usize, seed: u64) -> Result<GroundTruthDag> {
    if d < 2 {
        return Err(Error::Parameter(format!("SF graph needs d >= 2, got {d}")));
    }
    if k == 0 || k >= d {
        return Err(Error::Parameter(format!(
            "SF degree must satisfy 1 <= k < d, got k={k}, d={d}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // edges in arrival labels, always (newer, older)
    let mut edges: Vec<(usize, usize)> = Vec::with_capacity(k * (d - k));
    // each node appears once per incident edge
    let mut repeated: Vec<usize> = Vec::with_capacity(2 * k * d);
    for leaf in 1..=k {
        edges.push((leaf, 0));
        repeated.push(leaf);
        repeated.push(0);
    }
    let mut chosen = vec![false; d];
    for source in (k + 1)..d {
        let mut targets = Vec::with_capacity(k);
        while targets.len() < k {
            let t = repeated[rng.random_range(0..repeated.len())];
            if !chosen[t] {
                chosen[t] = true;
                targets.push(t);
            }
        }
        for &t in &targets {
            chosen[t] = false;
            edges.push((source, t));
            repeated.push(t);
            repeated.push(source);
        }
    }

    let mut relabel: Vec<usize> = (0..d).collect();
    relabel.shuffle(&mut rng);
    let mut g = BinaryGraph::empty(d);
    for (src, dst) in edges {
        g.set(relabel[src], relabel[dst], true);
    }
    // newest arrivals are sources
    let order: Vec<usize> = (0..d).rev().map(|a| relabel[a]).collect();
    GroundTruthDag::new(g, order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn er_two_nodes_has_the_single_edge() {
        for seed in 0..20 {
            let dag = generate_er(2, 1, seed).unwrap();
            assert_eq!(dag.n_edges(), 1);
        }
    }

    #[test]
    fn er_is_deterministic_per_seed() {
        assert_eq!(
            generate_er(10, 2, 17).unwrap(),
            generate_er(10, 2, 17).unwrap()
        );
        assert_ne!(
            generate_er(10, 2, 17).unwrap(),
            generate_er(10, 2, 18).unwrap()
        );
    }

    #[test]
    fn er_mean_edge_count_near_expectation() {
        let total: usize = (0..1000)
            .map(|s| generate_er(10, 2, s).unwrap().n_edges())
            .sum();
        let mean = total as f64 / 1000.0;
        assert!((18.0..=22.0).contains(&mean), "mean edges {mean}");
    }

    #[test]
    fn er_rejects_infeasible() {
        assert!(generate_er(10, 10, 0).is_err());
        assert!(generate_er(10, 0, 0).is_err());
        assert!(generate_er(1, 1, 0).is_err());
    }

    #[test]
    fn sf_three_nodes_one_attachment() {
        for seed in 0..20 {
            let dag = generate_sf(3, 1, seed).unwrap();
            assert_eq!(dag.n_edges(), 2);
            // each non-initial arrival has exactly one outgoing edge
            let out: Vec<usize> = (0..3).map(|i| dag.adjacency().children(i).len()).collect();
            assert_eq!(out.iter().filter(|&&c| c == 1).count(), 2);
        }
    }

    #[test]
    fn sf_edge_count_and_limits() {
        let dag = generate_sf(20, 2, 5).unwrap();
        assert_eq!(dag.n_edges(), 2 * 18);
        let dense = generate_sf(20, 10, 5).unwrap();
        assert_eq!(
            GraphModel::new(GraphScheme::Sf, 10)
                .unwrap()
                .requested_edges(20),
            200
        );
        assert_eq!(dense.n_edges(), 10 * 10);
        assert!(generate_sf(5, 5, 0).is_err());
        assert!(generate_sf(5, 0, 0).is_err());
    }

    #[test]
    fn sf_hubs_heavier_than_er() {
        let max_in = |g: &BinaryGraph| (0..g.d()).map(|j| g.parents(j).len()).max().unwrap();
        let mut sf_total = 0;
        let mut er_total = 0;
        let mut sf_max = 0;
        let mut er_max = 0;
        for seed in 0..100 {
            let sf = max_in(generate_sf(20, 2, seed).unwrap().adjacency());
            let er = max_in(generate_er(20, 2, seed).unwrap().adjacency());
            sf_total += sf;
            er_total += er;
            sf_max = sf_max.max(sf);
            er_max = er_max.max(er);
        }
        assert!(sf_max > er_max, "sf max {sf_max} vs er max {er_max}");
        assert!(sf_total > er_total);
    }

    #[test]
    fn random_dag_zero_edges_is_empty() {
        assert_eq!(random_dag(10, 0.0, 3).unwrap().n_edges(), 0);
        assert!(random_dag(4, 7.0, 3).is_err());
    }
}
