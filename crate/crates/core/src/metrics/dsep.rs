use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::BinaryGraph;

/// `true` iff every path between `i` and `j` is blocked by `z`.
pub fn d_separated(g: &BinaryGraph, i: usize, j: usize, z: &[usize]) -> Result<bool> {
    let d = g.d();
    if i >= d || j >= d || z.iter().any(|&v| v >= d) {
        return Err(Error::Input(format!("node index out of range for d = {d}")));
    }
    if i == j {
        return Err(Error::Input("d-separation needs two distinct nodes".into()));
    }
    if z.contains(&i) || z.contains(&j) {
        return Err(Error::Input(
            "endpoints may not be in the conditioning set".into(),
        ));
    }
    if !g.is_acyclic() {
        return Err(Error::Cyclic("d-separation needs a DAG".into()));
    }
    Ok(!reachable(g, i, z)[j])
}

/// Nodes d-connected to `source` given `z` (reachability over
/// (node, direction) states). Assumes `g` is acyclic.
pub(crate) fn reachable(g: &BinaryGraph, source: usize, z: &[usize]) -> Vec<bool> {
    let d = g.d();
    let mut in_z = vec![false; d];
    for &v in z {
        in_z[v] = true;
    }
    // Z together with its ancestors: colliders here are open.
    let mut anc_z = in_z.clone();
    let mut stack: Vec<usize> = z.to_vec();
    while let Some(v) = stack.pop() {
        for p in g.parents(v) {
            if !anc_z[p] {
                anc_z[p] = true;
                stack.push(p);
            }
        }
    }

    // Direction: `true` = arrived from a child (moving up).
    let mut visited = vec![[false; 2]; d];
    let mut result = vec![false; d];
    let mut queue = VecDeque::from([(source, true)]);
    while let Some((v, up)) = queue.pop_front() {
        if visited[v][up as usize] {
            continue;
        }
        visited[v][up as usize] = true;
        if !in_z[v] {
            result[v] = true;
        }
        if up {
            if !in_z[v] {
                queue.extend(g.parents(v).into_iter().map(|p| (p, true)));
                queue.extend(g.children(v).into_iter().map(|c| (c, false)));
            }
        } else {
            if !in_z[v] {
                queue.extend(g.children(v).into_iter().map(|c| (c, false)));
            }
            if anc_z[v] {
                queue.extend(g.parents(v).into_iter().map(|p| (p, true)));
            }
        }
    }
    result[source] = false;
    result
}
