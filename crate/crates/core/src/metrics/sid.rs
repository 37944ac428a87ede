use super::dsep::reachable;
use crate::error::{Error, Result};
use crate::graph::BinaryGraph;
use crate::par::{map_with, ExecMode};

/// Ordered pairs `(i, j)` whose interventional distribution is wrong when
/// adjusting for the estimated parents of `i`.
pub fn sid(truth: &BinaryGraph, estimate: &BinaryGraph) -> Result<usize> {
    sid_with(ExecMode::default(), truth, estimate)
}

/// [`sid`] with an explicit execution mode for the per-source loop.
pub fn sid_with(mode: ExecMode, truth: &BinaryGraph, estimate: &BinaryGraph) -> Result<usize> {
    if truth.d() != estimate.d() {
        return Err(Error::dims(truth.d(), estimate.d()));
    }
    if !truth.is_acyclic() {
        return Err(Error::Cyclic("SID truth graph".into()));
    }
    if !estimate.is_acyclic() {
        return Err(Error::Cyclic("SID estimate; prune to a DAG first".into()));
    }
    let d = truth.d();
    let ancestors: Vec<Vec<bool>> = (0..d).map(|j| ancestors_of(truth, j)).collect();
    let per_source = map_with(mode, (0..d).collect(), |i| {
        mistakes_from(truth, estimate, &ancestors, i)
    });
    Ok(per_source.into_iter().sum())
}

fn ancestors_of(g: &BinaryGraph, j: usize) -> Vec<bool> {
    let mut seen = vec![false; g.d()];
    let mut stack = g.parents(j);
    while let Some(v) = stack.pop() {
        if !seen[v] {
            seen[v] = true;
            stack.extend(g.parents(v));
        }
    }
    seen
}

fn mistakes_from(
    truth: &BinaryGraph,
    estimate: &BinaryGraph,
    ancestors: &[Vec<bool>],
    i: usize,
) -> usize {
    let d = truth.d();
    let z = estimate.parents(i);
    let desc_i = truth.descendants(i);
    let mut count = 0;
    for j in (0..d).filter(|&j| j != i) {
        // Estimated parents containing j claim "no effect of i on j".
        if z.contains(&j) {
            count += desc_i[j] as usize;
            continue;
        }
        if !valid_adjustment(truth, ancestors, &desc_i, i, j, &z) {
            count += 1;
        }
    }
    count
}

/// Generalized back-door check: `z` avoids descendants of nodes on causal
/// paths `i -> ... -> j`, and separates `i` from `j` once the first edge of
/// every causal path is removed.
fn valid_adjustment(
    truth: &BinaryGraph,
    ancestors: &[Vec<bool>],
    desc_i: &[bool],
    i: usize,
    j: usize,
    z: &[usize],
) -> bool {
    let d = truth.d();
    let on_causal: Vec<bool> = (0..d)
        .map(|w| desc_i[w] && (w == j || ancestors[j][w]))
        .collect();
    let mut backdoor = truth.clone();
    if on_causal.iter().any(|&c| c) {
        let mut forbidden = on_causal.clone();
        for w in (0..d).filter(|&w| on_causal[w]) {
            for (v, &below) in truth.descendants(w).iter().enumerate() {
                forbidden[v] |= below;
            }
        }
        if z.iter().any(|&v| forbidden[v]) {
            return false;
        }
        for w in truth.children(i) {
            if on_causal[w] {
                backdoor.set(i, w, false);
            }
        }
    }
    !reachable(&backdoor, i, z)[j]
}
