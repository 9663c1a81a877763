//! Abstract meaning representation graphs and PENMAN notation.
//!
//! A PENMAN expression such as
//!
//! ```text
//! (w / want-01
//!    :ARG0 (b / boy)
//!    :ARG1 (g / go-02
//!             :ARG0 b))
//! ```
//!
//! becomes an [`AmrGraph`] with one concept node per variable, one constant
//! node per constant occurrence, and one edge per relation. Inverse roles
//! (`:ARG0-of`) are normalized to forward edges at parse time; the root stays
//! the outermost variable even if it then has incoming edges.

mod canonical;
mod file;
mod parse;
mod serialize;

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use canonical::canonical_form;
pub use file::{parse_amr_file, AmrBlock};
pub use parse::parse_penman;
pub use serialize::{serialize_penman, serialize_penman_compact};

/// Roles that end in "-of" but are not inverses.
const NON_INVERSE_OF_ROLES: [&str; 3] = [":consist-of", ":prep-out-of", ":prep-on-behalf-of"];

pub(crate) fn is_inverse_role(role: &str) -> bool {
    role.ends_with("-of") && !NON_INVERSE_OF_ROLES.contains(&role)
}

/// Forward role for an inverse role, e.g. ":ARG0-of" -> ":ARG0".
pub(crate) fn deinvert_role(role: &str) -> &str {
    &role[..role.len() - 3]
}

pub(crate) fn invert_role(role: &str) -> String {
    format!("{role}-of")
}

/// Symbols that have the shape of an AMR variable (`b`, `p2`, `x11`).
pub(crate) fn looks_like_variable(symbol: &str) -> bool {
    let mut chars = symbol.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_lowercase()) && chars.all(|c| c.is_ascii_digit())
}

pub(crate) fn is_symbol_char(c: char) -> bool {
    !(c.is_whitespace() || matches!(c, '(' | ')' | '"' | ':' | '/'))
}

fn is_plain_symbol(s: &str) -> bool {
    !s.is_empty() && s.chars().all(is_symbol_char)
}

/// A location in PENMAN source text. Lines and columns are 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Position {
    pub offset: usize,
    pub line: usize,
    pub column: usize,
}

impl Position {
    pub(crate) fn locate(text: &str, offset: usize) -> Self {
        let before = &text[..offset.min(text.len())];
        let line = before.matches('\n').count() + 1;
        let line_start = before.rfind('\n').map_or(0, |i| i + 1);
        let column = before[line_start..].chars().count() + 1;
        Position {
            offset,
            line,
            column,
        }
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AmrError {
    #[error("syntax error at {position}: expected {expected}, found {found}")]
    Syntax {
        position: Position,
        expected: String,
        found: String,
    },
    #[error("unbound variable {name:?} at {position}")]
    UnboundVariable { name: String, position: Position },
    #[error("variable {variable:?} at {position} is bound to {second:?} but already bound to {first:?}")]
    DuplicateConcept {
        variable: String,
        first: String,
        second: String,
        position: Position,
    },
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("AMR file line {line}: {reason}")]
    File { line: usize, reason: String },
}

impl AmrError {
    /// Source position for parse errors.
    pub fn position(&self) -> Option<Position> {
        match self {
            AmrError::Syntax { position, .. }
            | AmrError::UnboundVariable { position, .. }
            | AmrError::DuplicateConcept { position, .. } => Some(*position),
            AmrError::InvalidGraph(_) | AmrError::File { .. } => None,
        }
    }
}

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Concept,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AmrNode {
    pub kind: NodeKind,
    /// Concept name (`want-01`) or constant literal without quotes (`Smith`, `3`, `-`).
    pub label: String,
    /// Set for concepts only.
    pub variable: Option<String>,
    /// Constants only: whether the literal was written as a quoted string.
    pub quoted: bool,
}

impl AmrNode {
    pub fn concept(variable: impl Into<String>, label: impl Into<String>) -> Self {
        AmrNode {
            kind: NodeKind::Concept,
            label: label.into(),
            variable: Some(variable.into()),
            quoted: false,
        }
    }

    pub fn constant(label: impl Into<String>, quoted: bool) -> Self {
        AmrNode {
            kind: NodeKind::Constant,
            label: label.into(),
            variable: None,
            quoted,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AmrEdge {
    pub source: NodeId,
    /// Starts with ':'; always in forward (non-inverted) form.
    pub role: String,
    pub target: NodeId,
    /// Surface form only: the edge was written as an inverse role under its
    /// target. Serialization reproduces it where it can; canonical forms ignore it.
    #[serde(default)]
    pub inverted: bool,
}

impl AmrEdge {
    pub fn new(source: NodeId, role: impl Into<String>, target: NodeId) -> Self {
        AmrEdge {
            source,
            role: role.into(),
            target,
            inverted: false,
        }
    }
}

/// A rooted, directed, labeled semantic graph for one document.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AmrGraph {
    nodes: Vec<AmrNode>,
    edges: Vec<AmrEdge>,
    root: NodeId,
    cyclic: bool,
    pub doc_id: Option<String>,
}

impl AmrGraph {
    /// Assembles a graph, checking every structural invariant: edge endpoints
    /// exist, roles start with ':' and are in forward form, concepts carry
    /// unique variables, the root is a concept, and every node is connected
    /// to the root when edge direction is ignored.
    pub fn from_parts(
        nodes: Vec<AmrNode>,
        edges: Vec<AmrEdge>,
        root: NodeId,
    ) -> Result<Self, AmrError> {
        let invalid = |msg: String| Err(AmrError::InvalidGraph(msg));
        if root >= nodes.len() {
            return invalid(format!("root {root} out of range"));
        }
        if nodes[root].kind != NodeKind::Concept {
            return invalid("root must be a concept".into());
        }
        let mut variables = HashSet::new();
        for (i, node) in nodes.iter().enumerate() {
            match node.kind {
                NodeKind::Concept => {
                    let Some(var) = node.variable.as_deref() else {
                        return invalid(format!("concept node {i} has no variable"));
                    };
                    if !is_plain_symbol(var) {
                        return invalid(format!("variable {var:?} is not a symbol"));
                    }
                    if !variables.insert(var) {
                        return invalid(format!("variable {var:?} bound twice"));
                    }
                    if !is_plain_symbol(&node.label) {
                        return invalid(format!("concept {:?} is not a symbol", node.label));
                    }
                    if node.quoted {
                        return invalid(format!("concept node {i} marked quoted"));
                    }
                }
                NodeKind::Constant => {
                    if node.variable.is_some() {
                        return invalid(format!("constant node {i} has a variable"));
                    }
                    if !node.quoted
                        && (!is_plain_symbol(&node.label) || looks_like_variable(&node.label))
                    {
                        return invalid(format!(
                            "unquoted constant {:?} is not a literal symbol",
                            node.label
                        ));
                    }
                }
            }
        }
        for node in nodes.iter().filter(|n| n.kind == NodeKind::Constant && !n.quoted) {
            if variables.contains(node.label.as_str()) {
                return invalid(format!("constant {:?} shadows a variable", node.label));
            }
        }
        for edge in &edges {
            if edge.source >= nodes.len() || edge.target >= nodes.len() {
                return invalid(format!("edge {edge:?} has a dangling endpoint"));
            }
            if !edge.role.starts_with(':') || edge.role.len() < 2 || !is_plain_symbol(&edge.role[1..]) {
                return invalid(format!("bad role {:?}", edge.role));
            }
            if is_inverse_role(&edge.role) {
                return invalid(format!("role {:?} must be stored in forward form", edge.role));
            }
        }
        let graph = AmrGraph::assemble(nodes, edges, root);
        let degrees = graph.degrees();
        for (i, node) in graph.nodes.iter().enumerate() {
            if node.kind == NodeKind::Constant && degrees[i] != 1 {
                return invalid(format!("constant node {i} must have exactly one edge"));
            }
        }
        let reached = graph.undirected_reach(root);
        if reached.len() != graph.nodes.len() {
            return invalid("graph is not connected to its root".into());
        }
        Ok(graph)
    }

    /// Builds without validation; the parser guarantees the invariants.
    pub(crate) fn assemble(nodes: Vec<AmrNode>, edges: Vec<AmrEdge>, root: NodeId) -> Self {
        let cyclic = has_directed_cycle(nodes.len(), &edges);
        AmrGraph {
            nodes,
            edges,
            root,
            cyclic,
            doc_id: None,
        }
    }

    pub fn with_doc_id(mut self, doc_id: impl Into<String>) -> Self {
        self.doc_id = Some(doc_id.into());
        self
    }

    pub fn nodes(&self) -> &[AmrNode] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &AmrNode {
        &self.nodes[id]
    }

    pub fn edges(&self) -> &[AmrEdge] {
        &self.edges
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    /// True when inverse-role normalization produced a directed cycle.
    pub fn is_cyclic(&self) -> bool {
        self.cyclic
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn in_degree(&self, id: NodeId) -> usize {
        self.edges.iter().filter(|e| e.target == id).count()
    }

    pub fn out_degree(&self, id: NodeId) -> usize {
        self.edges.iter().filter(|e| e.source == id).count()
    }

    /// In-degree plus out-degree, for every node at once.
    pub fn degrees(&self) -> Vec<usize> {
        let mut degrees = vec![0; self.nodes.len()];
        for e in &self.edges {
            degrees[e.source] += 1;
            degrees[e.target] += 1;
        }
        degrees
    }

    pub fn variable_index(&self) -> HashMap<&str, NodeId> {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, n)| n.variable.as_deref().map(|v| (v, i)))
            .collect()
    }

    fn undirected_reach(&self, start: NodeId) -> HashSet<NodeId> {
        let mut adjacency = vec![Vec::new(); self.nodes.len()];
        for e in &self.edges {
            adjacency[e.source].push(e.target);
            adjacency[e.target].push(e.source);
        }
        let mut seen = HashSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(n) = queue.pop_front() {
            for &m in &adjacency[n] {
                if seen.insert(m) {
                    queue.push_back(m);
                }
            }
        }
        seen
    }
}

fn has_directed_cycle(n: usize, edges: &[AmrEdge]) -> bool {
    let mut out = vec![Vec::new(); n];
    let mut indegree = vec![0usize; n];
    for e in edges {
        out[e.source].push(e.target);
        indegree[e.target] += 1;
    }
    // Kahn: any node never reaching in-degree 0 sits on or behind a cycle.
    let mut queue: VecDeque<NodeId> = (0..n).filter(|&i| indegree[i] == 0).collect();
    let mut removed = 0;
    while let Some(v) = queue.pop_front() {
        removed += 1;
        for &w in &out[v] {
            indegree[w] -= 1;
            if indegree[w] == 0 {
                queue.push_back(w);
            }
        }
    }
    removed != n
}
