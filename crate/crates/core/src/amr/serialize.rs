use std::fmt::Write;

use super::{invert_role, AmrEdge, AmrGraph, NodeId, NodeKind};

/// Serializes `graph` as indented PENMAN text.
///
/// Each edge is written under one of its endpoints: the source for forward
/// edges, the target for edges parsed from inverse roles. When that choice
/// would leave part of the graph unreachable from the root, the first such
/// edge (in stored order) is written from the other side instead. A concept
/// is expanded at its first occurrence; later occurrences refer to its
/// variable.
pub fn serialize_penman(graph: &AmrGraph) -> String {
    Writer::new(graph, Some(4)).run()
}

/// Single-line PENMAN text.
pub fn serialize_penman_compact(graph: &AmrGraph) -> String {
    Writer::new(graph, None).run()
}

pub(crate) fn constant_literal(label: &str, quoted: bool) -> String {
    if quoted {
        let escaped = label.replace('\\', "\\\\").replace('"', "\\\"");
        format!("\"{escaped}\"")
    } else {
        label.to_string()
    }
}

fn other_end(edge: &AmrEdge, id: NodeId) -> NodeId {
    if edge.source == id {
        edge.target
    } else {
        edge.source
    }
}

/// Picks the endpoint that writes each edge.
fn assign_writers(graph: &AmrGraph) -> Vec<NodeId> {
    let edges = graph.edges();
    let mut writer: Vec<NodeId> = edges
        .iter()
        .map(|e| {
            let preferred = if e.inverted { e.target } else { e.source };
            if graph.node(preferred).kind == NodeKind::Concept {
                preferred
            } else {
                other_end(e, preferred)
            }
        })
        .collect();
    loop {
        let mut written_by = vec![Vec::new(); graph.node_count()];
        for (i, &w) in writer.iter().enumerate() {
            written_by[w].push(i);
        }
        let mut reached = vec![false; graph.node_count()];
        reached[graph.root()] = true;
        let mut stack = vec![graph.root()];
        while let Some(v) = stack.pop() {
            for &i in &written_by[v] {
                let u = other_end(&edges[i], v);
                if !reached[u] {
                    reached[u] = true;
                    stack.push(u);
                }
            }
        }
        if reached.iter().all(|&r| r) {
            return writer;
        }
        let crossing = edges
            .iter()
            .position(|e| reached[e.source] != reached[e.target])
            .expect("graph is connected");
        let e = &edges[crossing];
        writer[crossing] = if reached[e.source] { e.source } else { e.target };
    }
}

struct Writer<'g> {
    graph: &'g AmrGraph,
    indent: Option<usize>,
    written_by: Vec<Vec<usize>>,
    expanded: Vec<bool>,
    out: String,
}

impl<'g> Writer<'g> {
    fn new(graph: &'g AmrGraph, indent: Option<usize>) -> Self {
        let mut written_by = vec![Vec::new(); graph.node_count()];
        for (i, w) in assign_writers(graph).into_iter().enumerate() {
            written_by[w].push(i);
        }
        Writer {
            graph,
            indent,
            written_by,
            expanded: vec![false; graph.node_count()],
            out: String::new(),
        }
    }

    fn run(mut self) -> String {
        self.expand(self.graph.root(), 1);
        self.out
    }

    fn reference(&self, id: NodeId) -> String {
        let node = self.graph.node(id);
        match node.kind {
            NodeKind::Concept => node.variable.clone().unwrap_or_default(),
            NodeKind::Constant => constant_literal(&node.label, node.quoted),
        }
    }

    fn expand(&mut self, id: NodeId, depth: usize) {
        self.expanded[id] = true;
        let node = self.graph.node(id);
        let _ = write!(
            self.out,
            "({} / {}",
            node.variable.as_deref().unwrap_or_default(),
            node.label
        );
        for k in 0..self.written_by[id].len() {
            let edge = &self.graph.edges()[self.written_by[id][k]];
            let (role, other) = if edge.source == id {
                (edge.role.clone(), edge.target)
            } else {
                (invert_role(&edge.role), edge.source)
            };
            match self.indent {
                Some(width) => {
                    self.out.push('\n');
                    self.out.push_str(&" ".repeat(width * depth));
                }
                None => self.out.push(' '),
            }
            self.out.push_str(&role);
            self.out.push(' ');
            let other_node = self.graph.node(other);
            if other_node.kind == NodeKind::Concept && !self.expanded[other] {
                self.expand(other, depth + 1);
            } else {
                let r = self.reference(other);
                self.out.push_str(&r);
            }
        }
        self.out.push(')');
    }
}
