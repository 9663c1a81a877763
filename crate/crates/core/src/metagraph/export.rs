//! Byte-deterministic exports: Graphviz dot and graph-json.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{MetaEdge, MetaGraph, MetaGraphError, MetaNode};
use crate::amr::NodeKind;

pub const GRAPH_JSON_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Dot,
    GraphJson,
}

impl FromStr for ExportFormat {
    type Err = MetaGraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "dot" => Ok(ExportFormat::Dot),
            "graph-json" | "graph_json" => Ok(ExportFormat::GraphJson),
            other => Err(MetaGraphError::UnsupportedFormat(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJsonNode {
    pub key: String,
    pub kind: NodeKind,
    pub weight: u64,
    pub graph_count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJsonEdge {
    pub source: String,
    pub role: String,
    pub target: String,
    pub weight: u64,
}

/// Plain-data form of a metagraph. Nodes are sorted by descending weight,
/// then key; edges by descending weight, then (source, role, target).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub version: u32,
    #[serde(default)]
    pub n_source_graphs: u64,
    pub nodes: Vec<GraphJsonNode>,
    pub edges: Vec<GraphJsonEdge>,
}

fn sorted_nodes(meta: &MetaGraph) -> Vec<&MetaNode> {
    let mut nodes: Vec<&MetaNode> = meta.nodes.values().collect();
    nodes.sort_by(|a, b| b.weight.cmp(&a.weight).then_with(|| a.key.cmp(&b.key)));
    nodes
}

fn sorted_edges(meta: &MetaGraph) -> Vec<&MetaEdge> {
    let mut edges: Vec<&MetaEdge> = meta.edges.values().collect();
    edges.sort_by(|a, b| {
        b.weight
            .cmp(&a.weight)
            .then_with(|| (&a.source, &a.role, &a.target).cmp(&(&b.source, &b.role, &b.target)))
    });
    edges
}

fn dot_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Line width for an edge of `weight`; 1 for weight 1, growing with log2.
pub fn pen_width(weight: u64) -> f64 {
    1.0 + (weight.max(1) as f64).log2()
}

impl MetaGraph {
    pub fn to_graph_json(&self) -> GraphJson {
        GraphJson {
            version: GRAPH_JSON_VERSION,
            n_source_graphs: self.n_source_graphs,
            nodes: sorted_nodes(self)
                .into_iter()
                .map(|n| GraphJsonNode {
                    key: n.key.clone(),
                    kind: n.kind,
                    weight: n.weight,
                    graph_count: n.graph_count,
                })
                .collect(),
            edges: sorted_edges(self)
                .into_iter()
                .map(|e| GraphJsonEdge {
                    source: e.source.clone(),
                    role: e.role.clone(),
                    target: e.target.clone(),
                    weight: e.weight,
                })
                .collect(),
        }
    }

    /// Rebuilds a metagraph from its graph-json form, rejecting unknown
    /// versions, repeated keys and dangling edges.
    pub fn from_graph_json(doc: &GraphJson) -> Result<MetaGraph, MetaGraphError> {
        if doc.version != GRAPH_JSON_VERSION {
            return Err(MetaGraphError::InvalidGraphJson(format!(
                "unsupported version {}",
                doc.version
            )));
        }
        let mut nodes = BTreeMap::new();
        for n in &doc.nodes {
            let node = MetaNode {
                key: n.key.clone(),
                kind: n.kind,
                weight: n.weight,
                graph_count: n.graph_count,
            };
            if nodes.insert(n.key.clone(), node).is_some() {
                return Err(MetaGraphError::InvalidGraphJson(format!("node {:?} listed twice", n.key)));
            }
        }
        let mut edges = BTreeMap::new();
        for e in &doc.edges {
            let key = (e.source.clone(), e.role.clone(), e.target.clone());
            let edge = MetaEdge {
                source: e.source.clone(),
                role: e.role.clone(),
                target: e.target.clone(),
                weight: e.weight,
            };
            if edges.insert(key, edge).is_some() {
                return Err(MetaGraphError::InvalidGraphJson(format!(
                    "edge {} {} {} listed twice",
                    e.source, e.role, e.target
                )));
            }
        }
        let meta = MetaGraph {
            nodes,
            edges,
            n_source_graphs: doc.n_source_graphs,
        };
        meta.check()?;
        Ok(meta)
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph metagraph {\n");
        for n in sorted_nodes(self) {
            let label = dot_string(&format!("{} ({})", n.key, n.weight));
            let shape = match n.kind {
                NodeKind::Concept => "ellipse",
                NodeKind::Constant => "box",
            };
            let _ = writeln!(out, "  {} [label={label}, shape={shape}];", dot_string(&n.key));
        }
        for e in sorted_edges(self) {
            let _ = writeln!(
                out,
                "  {} -> {} [label={}, weight={}, penwidth={:.3}];",
                dot_string(&e.source),
                dot_string(&e.target),
                dot_string(&e.role),
                e.weight,
                pen_width(e.weight)
            );
        }
        out.push_str("}\n");
        out
    }

    pub fn export(&self, format: ExportFormat) -> String {
        match format {
            ExportFormat::Dot => self.to_dot(),
            ExportFormat::GraphJson => {
                let mut s = serde_json::to_string_pretty(&self.to_graph_json()).expect("graph-json serializes");
                s.push('\n');
                s
            }
        }
    }
}

/// Exports `meta` as `format` ("dot" or "graph-json").
pub fn export_graph(meta: &MetaGraph, format: &str) -> Result<String, MetaGraphError> {
    Ok(meta.export(format.parse()?))
}
