//! Reference graphs for real datasets.

use casper_core::graph::BinaryGraph;

use crate::error::{CliError, Result};

/// Canonical node names of the protein-signalling network, in column order.
pub const SACHS_NODES: [&str; 11] = [
    "raf", "mek", "plcg", "pip2", "pip3", "erk", "akt", "pka", "pkc", "p38", "jnk",
];

/// The 17 consensus arcs of the protein-signalling network.
pub const SACHS_EDGES: [(&str, &str); 17] = [
    ("plcg", "pip3"),
    ("plcg", "pip2"),
    ("pip3", "pip2"),
    ("pkc", "pka"),
    ("pkc", "raf"),
    ("pka", "raf"),
    ("pkc", "jnk"),
    ("pka", "jnk"),
    ("pkc", "p38"),
    ("pka", "p38"),
    ("pkc", "mek"),
    ("pka", "mek"),
    ("raf", "mek"),
    ("mek", "erk"),
    ("pka", "erk"),
    ("erk", "akt"),
    ("pka", "akt"),
];

/// Maps common column spellings to canonical node names.
fn canonical(name: &str) -> Option<&'static str> {
    let key: String = name
        .to_ascii_lowercase()
        .chars()
        .filter(|c| c.is_ascii_alphanumeric())
        .collect();
    let canon = match key.as_str() {
        "raf" | "praf" => "raf",
        "mek" | "mek12" | "pmek" => "mek",
        "plcg" | "plc" | "plcgamma" => "plcg",
        "pip2" => "pip2",
        "pip3" => "pip3",
        "erk" | "p4442" | "erk12" => "erk",
        "akt" | "pakts473" | "pakt" => "akt",
        "pka" => "pka",
        "pkc" => "pkc",
        "p38" => "p38",
        "jnk" | "pjnk" => "jnk",
        _ => return None,
    };
    Some(canon)
}

/// Consensus graph laid out in the column order of `names`.
pub fn sachs_graph(names: &[String]) -> Result<BinaryGraph> {
    let mut index = Vec::with_capacity(names.len());
    for name in names {
        let canon = canonical(name).ok_or_else(|| {
            CliError::Input(format!(
                "column {name:?} is not a node of the reference network"
            ))
        })?;
        if index.contains(&canon) {
            return Err(CliError::Input(format!(
                "column {name:?} duplicates node {canon}"
            )));
        }
        index.push(canon);
    }
    for node in SACHS_NODES {
        if !index.contains(&node) {
            return Err(CliError::Input(format!(
                "reference node {node} has no column"
            )));
        }
    }
    let pos = |n: &str| index.iter().position(|&x| x == n).expect("checked above");
    let edges: Vec<(usize, usize)> = SACHS_EDGES.iter().map(|&(a, b)| (pos(a), pos(b))).collect();
    Ok(BinaryGraph::from_edges(names.len(), &edges)?)
}

/// Consensus graph in canonical node order.
pub fn sachs_canonical() -> BinaryGraph {
    let names: Vec<String> = SACHS_NODES.iter().map(|s| s.to_string()).collect();
    sachs_graph(&names).expect("canonical names resolve")
}
