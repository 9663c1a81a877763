//! Superimposition of many AMR graphs into one weighted metagraph.
//!
//! Nodes merge by key: the concept label for concepts (`want-01`) and
//! `const:` followed by the literal for constants. A node's weight is its
//! degree-weighted frequency, the sum over source graphs of the degree of its
//! occurrences. Edges merge by (source key, role, target key).
//!
//! All maps are ordered and all weights are integers, so a metagraph built
//! by merging partial results in any order is identical to the serial one.

mod export;
mod wcc;

use std::collections::BTreeMap;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::amr::{AmrGraph, AmrNode, NodeKind};

pub use export::{export_graph, pen_width, ExportFormat, GraphJson, GraphJsonEdge, GraphJsonNode, GRAPH_JSON_VERSION};

pub const CONSTANT_PREFIX: &str = "const:";
pub const DEFAULT_NODE_THRESHOLD: u64 = 300;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum MetaGraphError {
    #[error("no graphs to superimpose")]
    EmptyInput,
    #[error("metagraph has no nodes")]
    EmptyGraph,
    #[error("unsupported export format {0:?} (expected dot or graph-json)")]
    UnsupportedFormat(String),
    #[error("invalid graph-json: {0}")]
    InvalidGraphJson(String),
}

/// How edge weights accumulate across source graphs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeWeighting {
    /// Every occurrence counts.
    #[default]
    Occurrences,
    /// Each source graph counts at most once per edge key.
    GraphPresence,
}

/// Which node statistic the structure filter compares against its threshold.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeStatistic {
    /// Sum of per-graph degrees.
    #[default]
    DegreeWeighted,
    /// Number of source graphs containing the key.
    GraphCount,
}

impl FromStr for NodeStatistic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "degree_weighted" | "degree-weighted" => Ok(NodeStatistic::DegreeWeighted),
            "graph_count" | "graph-count" => Ok(NodeStatistic::GraphCount),
            other => Err(format!("unknown node statistic {other:?}")),
        }
    }
}

impl FromStr for EdgeWeighting {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "occurrences" => Ok(EdgeWeighting::Occurrences),
            "graph_presence" | "graph-presence" => Ok(EdgeWeighting::GraphPresence),
            other => Err(format!("unknown edge weighting {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaNode {
    pub key: String,
    pub kind: NodeKind,
    pub weight: u64,
    pub graph_count: u64,
}

impl MetaNode {
    pub fn statistic(&self, statistic: NodeStatistic) -> u64 {
        match statistic {
            NodeStatistic::DegreeWeighted => self.weight,
            NodeStatistic::GraphCount => self.graph_count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaEdge {
    pub source: String,
    pub role: String,
    pub target: String,
    pub weight: u64,
}

pub type EdgeKey = (String, String, String);

/// Summary numbers for a metagraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetaGraphStats {
    pub n_source_graphs: u64,
    pub n_nodes: usize,
    pub n_edges: usize,
    pub total_node_weight: u64,
    pub total_edge_weight: u64,
    pub max_node_weight: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MetaGraph {
    nodes: BTreeMap<String, MetaNode>,
    edges: BTreeMap<EdgeKey, MetaEdge>,
    n_source_graphs: u64,
}

/// Merge key of an AMR node.
pub fn node_key(node: &AmrNode) -> String {
    match node.kind {
        NodeKind::Concept => node.label.clone(),
        NodeKind::Constant => format!("{CONSTANT_PREFIX}{}", node.label),
    }
}

impl MetaGraph {
    /// The metagraph of a single AMR graph.
    pub fn from_graph(graph: &AmrGraph, weighting: EdgeWeighting) -> Self {
        let keys: Vec<String> = graph.nodes().iter().map(node_key).collect();
        let degrees = graph.degrees();
        let mut nodes: BTreeMap<String, MetaNode> = BTreeMap::new();
        for (i, node) in graph.nodes().iter().enumerate() {
            let entry = nodes.entry(keys[i].clone()).or_insert_with(|| MetaNode {
                key: keys[i].clone(),
                kind: node.kind,
                weight: 0,
                graph_count: 1,
            });
            entry.weight += degrees[i] as u64;
        }
        let mut edges: BTreeMap<EdgeKey, MetaEdge> = BTreeMap::new();
        for e in graph.edges() {
            let key = (keys[e.source].clone(), e.role.clone(), keys[e.target].clone());
            let entry = edges.entry(key).or_insert_with_key(|(s, r, t)| MetaEdge {
                source: s.clone(),
                role: r.clone(),
                target: t.clone(),
                weight: 0,
            });
            entry.weight = match weighting {
                EdgeWeighting::Occurrences => entry.weight + 1,
                EdgeWeighting::GraphPresence => 1,
            };
        }
        MetaGraph {
            nodes,
            edges,
            n_source_graphs: 1,
        }
    }

    /// Adds all weights of `other` into `self`.
    pub fn merge(&mut self, other: MetaGraph) {
        self.n_source_graphs += other.n_source_graphs;
        for (key, node) in other.nodes {
            match self.nodes.get_mut(&key) {
                Some(existing) => {
                    existing.weight += node.weight;
                    existing.graph_count += node.graph_count;
                }
                None => {
                    self.nodes.insert(key, node);
                }
            }
        }
        for (key, edge) in other.edges {
            match self.edges.get_mut(&key) {
                Some(existing) => existing.weight += edge.weight,
                None => {
                    self.edges.insert(key, edge);
                }
            }
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = &MetaNode> {
        self.nodes.values()
    }

    pub fn edges(&self) -> impl Iterator<Item = &MetaEdge> {
        self.edges.values()
    }

    pub fn node(&self, key: &str) -> Option<&MetaNode> {
        self.nodes.get(key)
    }

    pub fn edge(&self, source: &str, role: &str, target: &str) -> Option<&MetaEdge> {
        self.edges
            .get(&(source.to_string(), role.to_string(), target.to_string()))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn n_source_graphs(&self) -> u64 {
        self.n_source_graphs
    }

    pub fn stats(&self) -> MetaGraphStats {
        MetaGraphStats {
            n_source_graphs: self.n_source_graphs,
            n_nodes: self.nodes.len(),
            n_edges: self.edges.len(),
            total_node_weight: self.nodes.values().map(|n| n.weight).sum(),
            total_edge_weight: self.edges.values().map(|e| e.weight).sum(),
            max_node_weight: self.nodes.values().map(|n| n.weight).max().unwrap_or(0),
        }
    }

    /// Node weights by key.
    pub fn node_weights(&self) -> BTreeMap<&str, u64> {
        self.nodes.iter().map(|(k, n)| (k.as_str(), n.weight)).collect()
    }

    /// Edge weights by (source, role, target).
    pub fn edge_weights(&self) -> BTreeMap<&EdgeKey, u64> {
        self.edges.iter().map(|(k, e)| (k, e.weight)).collect()
    }

    /// Keeps the nodes whose `statistic` is at least `threshold`, and the
    /// edges between them. Weights are unchanged.
    pub fn filter_by(&self, statistic: NodeStatistic, threshold: u64) -> MetaGraph {
        let nodes: BTreeMap<String, MetaNode> = self
            .nodes
            .iter()
            .filter(|(_, n)| n.statistic(statistic) >= threshold)
            .map(|(k, n)| (k.clone(), n.clone()))
            .collect();
        let edges = self
            .edges
            .iter()
            .filter(|((s, _, t), _)| nodes.contains_key(s) && nodes.contains_key(t))
            .map(|(k, e)| (k.clone(), e.clone()))
            .collect();
        MetaGraph {
            nodes,
            edges,
            n_source_graphs: self.n_source_graphs,
        }
    }

    /// Keeps exactly the nodes with degree-weighted frequency ≥ `threshold`.
    pub fn filter_by_weight(&self, threshold: u64) -> MetaGraph {
        self.filter_by(NodeStatistic::DegreeWeighted, threshold)
    }

    /// The subgraph induced by `keys`.
    pub fn induced(&self, keys: &[&str]) -> MetaGraph {
        let nodes: BTreeMap<String, MetaNode> = keys
            .iter()
            .filter_map(|k| self.nodes.get(*k))
            .map(|n| (n.key.clone(), n.clone()))
            .collect();
        let edges = self
            .edges
            .iter()
            .filter(|((s, _, t), _)| nodes.contains_key(s) && nodes.contains_key(t))
            .map(|(k, e)| (k.clone(), e.clone()))
            .collect();
        MetaGraph {
            nodes,
            edges,
            n_source_graphs: self.n_source_graphs,
        }
    }

    pub fn largest_weakly_connected_component(&self) -> Result<MetaGraph, MetaGraphError> {
        wcc::largest(self)
    }

    pub fn weakly_connected_components(&self) -> Vec<Vec<&str>> {
        wcc::components(self)
    }

    fn check(&self) -> Result<(), MetaGraphError> {
        for (s, _, t) in self.edges.keys() {
            for end in [s, t] {
                if !self.nodes.contains_key(end) {
                    return Err(MetaGraphError::InvalidGraphJson(format!(
                        "edge endpoint {end:?} is not a node"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Superimposes `graphs` into one metagraph. Partial metagraphs are built in
/// parallel and merged; the result does not depend on graph order.
pub fn superimpose(graphs: &[AmrGraph], weighting: EdgeWeighting) -> Result<MetaGraph, MetaGraphError> {
    if graphs.is_empty() {
        return Err(MetaGraphError::EmptyInput);
    }
    Ok(graphs
        .par_iter()
        .fold(MetaGraph::default, |mut acc, g| {
            acc.merge(MetaGraph::from_graph(g, weighting));
            acc
        })
        .reduce(MetaGraph::default, |mut a, b| {
            a.merge(b);
            a
        }))
}
