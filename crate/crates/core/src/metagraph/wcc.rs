use std::cmp::Reverse;
use std::collections::HashMap;

use petgraph::unionfind::UnionFind;

use super::{MetaGraph, MetaGraphError};

/// Weakly connected components, each sorted by key, in the order of their
/// smallest key.
pub(super) fn components(meta: &MetaGraph) -> Vec<Vec<&str>> {
    let keys: Vec<&str> = meta.nodes.keys().map(String::as_str).collect();
    let index: HashMap<&str, usize> = keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let mut sets = UnionFind::<usize>::new(keys.len());
    for (s, _, t) in meta.edges.keys() {
        sets.union(index[s.as_str()], index[t.as_str()]);
    }
    let mut groups: HashMap<usize, Vec<&str>> = HashMap::new();
    for (i, key) in keys.iter().enumerate() {
        groups.entry(sets.find(i)).or_default().push(key);
    }
    let mut out: Vec<Vec<&str>> = groups.into_values().collect();
    out.sort_by(|a, b| a[0].cmp(b[0]));
    out
}

/// The component with the most nodes; ties go to the larger total node
/// weight, then to the component holding the lexicographically smallest key.
pub(super) fn largest(meta: &MetaGraph) -> Result<MetaGraph, MetaGraphError> {
    let comps = components(meta);
    let best = comps
        .iter()
        .min_by_key(|c| {
            let weight: u64 = c.iter().map(|k| meta.nodes[*k].weight).sum();
            (Reverse(c.len()), Reverse(weight), c[0])
        })
        .ok_or(MetaGraphError::EmptyGraph)?;
    Ok(meta.induced(best))
}
