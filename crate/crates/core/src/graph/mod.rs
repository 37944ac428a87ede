//! DAG representations, random graph generators, the smooth acyclicity
//! functionals and pruning.
//!
//! Adjacency convention throughout the crate: entry `(i, j)` is the edge
//! `X_i -> X_j`, so column `j` holds the parents of node `j`.

mod acyclicity;
mod generate;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub(crate) use acyclicity::h_and_square_gradient;
pub use acyclicity::{expm, h_gradient, h_value, AcyclicityForm, EXPM_TOLERANCE};
pub use generate::{generate_er, generate_sf, random_dag, GraphModel, GraphScheme};

/// Real-valued `d x d` weight matrix of a candidate graph.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedAdjacency {
    matrix: DMatrix<f64>,
}

impl WeightedAdjacency {
    pub fn new(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::dims(
                "square matrix",
                format!("{}x{}", matrix.nrows(), matrix.ncols()),
            ));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input(
                "weighted adjacency has non-finite entries".into(),
            ));
        }
        Ok(Self { matrix })
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            matrix: DMatrix::zeros(d, d),
        }
    }

    pub fn from_row_slice(d: usize, values: &[f64]) -> Result<Self> {
        if values.len() != d * d {
            return Err(Error::dims(d * d, values.len()));
        }
        Self::new(DMatrix::from_row_slice(d, d, values))
    }

    pub fn d(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    /// Sum of absolute entries.
    pub fn l1_norm(&self) -> f64 {
        self.matrix.iter().map(|v| v.abs()).sum()
    }

    /// Binary support with `|w| >= omega`, diagonal dropped. See [`prune`].
    pub fn prune(&self, omega: f64) -> Result<BinaryGraph> {
        prune(self, omega)
    }
}

/// Directed graph on `d` nodes stored as a dense boolean adjacency.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryGraph {
    d: usize,
    bits: Vec<bool>,
}

impl BinaryGraph {
    pub fn empty(d: usize) -> Self {
        Self {
            d,
            bits: vec![false; d * d],
        }
    }

    pub fn from_edges(d: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(d);
        for &(i, j) in edges {
            if i >= d || j >= d {
                return Err(Error::Input(format!(
                    "edge ({i}, {j}) out of range for d={d}"
                )));
            }
            g.set(i, j, true);
        }
        Ok(g)
    }

    /// Nonzero entries become edges (including the diagonal).
    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::dims(
                "square matrix",
                format!("{}x{}", m.nrows(), m.ncols()),
            ));
        }
        let d = m.nrows();
        let mut g = Self::empty(d);
        for i in 0..d {
            for j in 0..d {
                let v = m[(i, j)];
                if !v.is_finite() {
                    return Err(Error::Input(format!("non-finite entry at ({i}, {j})")));
                }
                g.set(i, j, v != 0.0);
            }
        }
        Ok(g)
    }

    /// Build from a row-major 0/1 slice; any nonzero byte is an edge.
    pub fn from_row_bits(d: usize, bits: &[u8]) -> Result<Self> {
        if bits.len() != d * d {
            return Err(Error::dims(d * d, bits.len()));
        }
        Ok(Self {
            d,
            bits: bits.iter().map(|&b| b != 0).collect(),
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.d + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, on: bool) {
        self.bits[i * self.d + j] = on;
    }

    pub fn n_edges(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let d = self.d;
        self.bits
            .iter()
            .enumerate()
            .filter(|(_, &b)| b)
            .map(move |(k, _)| (k / d, k % d))
    }

    pub fn parents(&self, j: usize) -> Vec<usize> {
        (0..self.d).filter(|&i| self.has_edge(i, j)).collect()
    }

    pub fn children(&self, i: usize) -> Vec<usize> {
        (0..self.d).filter(|&j| self.has_edge(i, j)).collect()
    }

    pub fn has_self_loop(&self) -> bool {
        (0..self.d).any(|i| self.has_edge(i, i))
    }

    /// 0/1 weights as a real matrix.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(
            self.d,
            self.d,
            |i, j| if self.has_edge(i, j) { 1.0 } else { 0.0 },
        )
    }

    pub fn to_weighted(&self) -> WeightedAdjacency {
        WeightedAdjacency {
            matrix: self.to_matrix(),
        }
    }

    /// Relabel nodes: node `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> BinaryGraph {
        let mut g = BinaryGraph::empty(self.d);
        for (i, j) in self.edges() {
            g.set(perm[i], perm[j], true);
        }
        g
    }

    pub fn is_acyclic(&self) -> bool {
        is_acyclic(self)
    }

    /// Topological order, or `None` when the graph has a cycle.
    pub fn topological_order(&self) -> Option<Vec<usize>> {
        let d = self.d;
        let mut indegree: Vec<usize> = (0..d).map(|j| self.parents(j).len()).collect();
        let mut ready: Vec<usize> = (0..d).rev().filter(|&j| indegree[j] == 0).collect();
        let mut order = Vec::with_capacity(d);
        while let Some(i) = ready.pop() {
            order.push(i);
            for j in (0..d).rev() {
                if self.has_edge(i, j) {
                    indegree[j] -= 1;
                    if indegree[j] == 0 {
                        ready.push(j);
                    }
                }
            }
        }
        (order.len() == d).then_some(order)
    }

    /// Descendants of `i`, excluding `i` itself unless it lies on a cycle.
    pub fn descendants(&self, i: usize) -> Vec<bool> {
        let mut seen = vec![false; self.d];
        let mut stack = self.children(i);
        while let Some(v) = stack.pop() {
            if !seen[v] {
                seen[v] = true;
                stack.extend(self.children(v));
            }
        }
        seen
    }
}

/// Depth-first search with white/grey/black marking.
pub fn is_acyclic(g: &BinaryGraph) -> bool {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Grey,
        Black,
    }
    let d = g.d();
    let mut mark = vec![Mark::White; d];
    for root in 0..d {
        if mark[root] != Mark::White {
            continue;
        }
        // (node, next child to inspect)
        let mut stack = vec![(root, 0usize)];
        mark[root] = Mark::Grey;
        while let Some(top) = stack.last_mut() {
            let (v, w) = *top;
            if w == d {
                mark[v] = Mark::Black;
                stack.pop();
                continue;
            }
            top.1 += 1;
            if !g.has_edge(v, w) {
                continue;
            }
            match mark[w] {
                Mark::Grey => return false,
                Mark::White => {
                    mark[w] = Mark::Grey;
                    stack.push((w, 0));
                }
                Mark::Black => {}
            }
        }
    }
    true
}

/// Keep edges with `|w| >= omega`; the diagonal is always cleared.
pub fn prune(w: &WeightedAdjacency, omega: f64) -> Result<BinaryGraph> {
    if !(omega > 0.0) || !omega.is_finite() {
        return Err(Error::Parameter(format!(
            "prune threshold must be positive, got {omega}"
        )));
    }
    let d = w.d();
    let mut g = BinaryGraph::empty(d);
    for i in 0..d {
        for j in 0..d {
            if i != j && w.get(i, j).abs() >= omega {
                g.set(i, j, true);
            }
        }
    }
    Ok(g)
}

/// Ground-truth DAG: adjacency plus a topological order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTruthDag {
    adjacency: BinaryGraph,
    order: Vec<usize>,
}

impl GroundTruthDag {
    /// Checks that `order` is a permutation and that every edge goes forward in it.
    pub fn new(adjacency: BinaryGraph, order: Vec<usize>) -> Result<Self> {
        let d = adjacency.d();
        let mut position = vec![usize::MAX; d];
        if order.len() != d {
            return Err(Error::dims(d, order.len()));
        }
        for (pos, &v) in order.iter().enumerate() {
            if v >= d || position[v] != usize::MAX {
                return Err(Error::Input("order is not a permutation".into()));
            }
            position[v] = pos;
        }
        for (i, j) in adjacency.edges() {
            if position[i] >= position[j] {
                return Err(Error::Cyclic(format!(
                    "edge {i}->{j} violates the topological order"
                )));
            }
        }
        Ok(Self { adjacency, order })
    }

    /// Derive the order from the graph; fails on cycles.
    pub fn from_graph(adjacency: BinaryGraph) -> Result<Self> {
        let order = adjacency
            .topological_order()
            .ok_or_else(|| Error::Cyclic("graph has no topological order".into()))?;
        Ok(Self { adjacency, order })
    }

    pub fn d(&self) -> usize {
        self.adjacency.d()
    }

    pub fn adjacency(&self) -> &BinaryGraph {
        &self.adjacency
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn n_edges(&self) -> usize {
        self.adjacency.n_edges()
    }
}

impl Serialize for BinaryGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<u8>> = (0..self.d)
            .map(|i| (0..self.d).map(|j| self.has_edge(i, j) as u8).collect())
            .collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for BinaryGraph {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<u8>>::deserialize(de)?;
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(serde::de::Error::custom(
                "adjacency rows must form a square matrix",
            ));
        }
        let flat: Vec<u8> = rows.into_iter().flatten().collect();
        BinaryGraph::from_row_bits(d, &flat).map_err(serde::de::Error::custom)
    }
}
