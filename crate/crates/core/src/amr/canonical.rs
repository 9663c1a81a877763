//! Variable-renaming-invariant canonical strings for AMR graphs.
//!
//! Nodes are ordered by color refinement seeded with (root?, kind, label)
//! and refined by (direction, role, neighbor color) multisets. Remaining ties
//! are broken by individualizing each candidate in turn and keeping the
//! lexicographically smallest encoding, so two graphs get the same string
//! exactly when they are isomorphic as rooted labeled graphs.
//!
//! The encoding is compact PENMAN text with variables renamed `v<rank>` and
//! edges taken in (source rank, role, target rank) order.

use std::collections::HashMap;

use super::serialize::serialize_penman_compact;
use super::{AmrEdge, AmrGraph, AmrNode, NodeKind};

const OUT: u8 = 0;
const IN: u8 = 1;

struct Context<'g> {
    graph: &'g AmrGraph,
    /// Per node: (direction, role rank, neighbor).
    adjacency: Vec<Vec<(u8, usize, usize)>>,
}

fn dense_rank<T: Ord>(keys: &[T]) -> Vec<usize> {
    let mut sorted: Vec<&T> = keys.iter().collect();
    sorted.sort();
    sorted.dedup();
    keys.iter()
        .map(|k| sorted.binary_search(&k).expect("key present"))
        .collect()
}

/// A node's color followed by its sorted (direction, role, neighbor color) triples.
type Signature = (usize, Vec<(u8, usize, usize)>);

fn class_count(colors: &[usize]) -> usize {
    colors.iter().max().map_or(0, |m| m + 1)
}

impl Context<'_> {
    fn refine(&self, mut colors: Vec<usize>) -> Vec<usize> {
        let mut classes = class_count(&colors);
        loop {
            let signatures: Vec<Signature> = self
                .adjacency
                .iter()
                .enumerate()
                .map(|(v, adj)| {
                    let mut around: Vec<_> = adj.iter().map(|&(d, r, u)| (d, r, colors[u])).collect();
                    around.sort_unstable();
                    (colors[v], around)
                })
                .collect();
            let refined = dense_rank(&signatures);
            let refined_classes = class_count(&refined);
            if refined_classes == classes {
                return refined;
            }
            colors = refined;
            classes = refined_classes;
        }
    }

    /// Members that are leaves hanging off the same node are interchangeable.
    fn are_twin_leaves(&self, members: &[usize]) -> bool {
        let neighbor = |v: usize| match self.adjacency[v].as_slice() {
            [(_, _, u)] => Some(*u),
            _ => None,
        };
        let Some(first) = neighbor(members[0]) else {
            return false;
        };
        members.iter().all(|&m| neighbor(m) == Some(first))
    }

    fn search(&self, colors: Vec<usize>) -> String {
        let colors = self.refine(colors);
        let classes = class_count(&colors);
        if classes == colors.len() {
            return self.encode(&colors);
        }
        let mut sizes = vec![0usize; classes];
        for &c in &colors {
            sizes[c] += 1;
        }
        let target = sizes.iter().position(|&s| s > 1).expect("a non-singleton class");
        let members: Vec<usize> = (0..colors.len()).filter(|&v| colors[v] == target).collect();
        let candidates = if self.are_twin_leaves(&members) {
            &members[..1]
        } else {
            &members[..]
        };
        candidates
            .iter()
            .map(|&v| {
                let keys: Vec<(usize, bool)> = colors
                    .iter()
                    .enumerate()
                    .map(|(u, &c)| (c, u != v))
                    .collect();
                self.search(dense_rank(&keys))
            })
            .min()
            .expect("at least one candidate")
    }

    fn encode(&self, ranks: &[usize]) -> String {
        let g = self.graph;
        let mut nodes = vec![AmrNode::constant("", false); ranks.len()];
        for (old, &new) in ranks.iter().enumerate() {
            let node = g.node(old);
            nodes[new] = match node.kind {
                NodeKind::Concept => AmrNode::concept(format!("v{new}"), node.label.clone()),
                NodeKind::Constant => node.clone(),
            };
        }
        let mut edges: Vec<AmrEdge> = g
            .edges()
            .iter()
            .map(|e| AmrEdge::new(ranks[e.source], e.role.clone(), ranks[e.target]))
            .collect();
        edges.sort_by(|a, b| (a.source, &a.role, a.target).cmp(&(b.source, &b.role, b.target)));
        let renamed = AmrGraph::assemble(nodes, edges, ranks[g.root()]);
        serialize_penman_compact(&renamed)
    }
}

/// Canonical string of `graph`; equal for two graphs iff they are isomorphic
/// (same concepts, constants, roles, root and re-entrancy structure).
pub fn canonical_form(graph: &AmrGraph) -> String {
    let mut roles: Vec<&str> = graph.edges().iter().map(|e| e.role.as_str()).collect();
    roles.sort_unstable();
    roles.dedup();
    let role_rank: HashMap<&str, usize> = roles.iter().enumerate().map(|(i, r)| (*r, i)).collect();

    let mut adjacency = vec![Vec::new(); graph.node_count()];
    for e in graph.edges() {
        let r = role_rank[e.role.as_str()];
        adjacency[e.source].push((OUT, r, e.target));
        adjacency[e.target].push((IN, r, e.source));
    }

    let seeds: Vec<(bool, NodeKind, bool, &str)> = graph
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, n)| (i != graph.root(), n.kind, n.quoted, n.label.as_str()))
        .collect();

    let ctx = Context { graph, adjacency };
    ctx.search(dense_rank(&seeds))
}
