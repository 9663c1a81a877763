//! Brute-force reference implementations and random instance generators
//! shared by the integration and acceptance tests.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use framefinder_core::amr::{AmrEdge, AmrGraph, AmrNode, NodeKind};
use framefinder_core::metagraph::{GraphJson, GraphJsonEdge, GraphJsonNode, MetaGraph, GRAPH_JSON_VERSION};

const ROLES: [&str; 5] = [":ARG0", ":ARG1", ":mod", ":op1", ":name"];

/// A random connected AMR graph over `alphabet` concepts and a handful of
/// constants. Skewed label choice makes some keys very frequent.
pub fn random_graph<R: Rng>(rng: &mut R, alphabet: usize) -> AmrGraph {
    let n = rng.random_range(1..=10);
    let pick = |rng: &mut R| {
        let a: usize = rng.random_range(0..alphabet);
        let b: usize = rng.random_range(0..alphabet);
        a.min(b)
    };
    let mut nodes = vec![AmrNode::concept("v0", format!("c{}", pick(rng)))];
    let mut concepts = vec![0usize];
    let mut edges = Vec::new();
    for i in 1..n {
        let attach = concepts[rng.random_range(0..concepts.len())];
        let role = ROLES[rng.random_range(0..ROLES.len())];
        if rng.random_bool(0.2) {
            let literal = rng.random_range(0..5);
            nodes.push(AmrNode::constant(format!("lit{literal}"), literal % 2 == 0));
            edges.push(AmrEdge::new(attach, role, i));
        } else {
            nodes.push(AmrNode::concept(format!("v{i}"), format!("c{}", pick(rng))));
            concepts.push(i);
            if rng.random_bool(0.8) {
                edges.push(AmrEdge::new(attach, role, i));
            } else {
                edges.push(AmrEdge::new(i, role, attach));
            }
        }
    }
    for _ in 0..rng.random_range(0..3) {
        let s = concepts[rng.random_range(0..concepts.len())];
        let t = concepts[rng.random_range(0..concepts.len())];
        edges.push(AmrEdge::new(s, ROLES[rng.random_range(0..ROLES.len())], t));
    }
    AmrGraph::from_parts(nodes, edges, 0).expect("generated graph is valid")
}

pub fn random_graph_set<R: Rng>(rng: &mut R) -> Vec<AmrGraph> {
    let alphabet = rng.random_range(2..=40);
    let size = rng.random_range(1..=400);
    (0..size).map(|_| random_graph(rng, alphabet)).collect()
}

pub fn key_of(node: &AmrNode) -> String {
    match node.kind {
        NodeKind::Concept => node.label.clone(),
        NodeKind::Constant => format!("const:{}", node.label),
    }
}

#[derive(Debug, Default, PartialEq)]
pub struct BruteMeta {
    /// key -> (sum of per-graph degrees, number of graphs containing the key)
    pub nodes: BTreeMap<String, (u64, u64)>,
    /// (source key, role, target key) -> occurrences
    pub edges: BTreeMap<(String, String, String), u64>,
}

/// Superimposition by direct counting: every node's degree is found by
/// scanning the edge list, self-loops counting twice.
pub fn brute_metagraph(graphs: &[AmrGraph]) -> BruteMeta {
    let mut out = BruteMeta::default();
    for g in graphs {
        let mut seen = BTreeSet::new();
        for (v, node) in g.nodes().iter().enumerate() {
            let mut degree = 0u64;
            for e in g.edges() {
                if e.source == v {
                    degree += 1;
                }
                if e.target == v {
                    degree += 1;
                }
            }
            let key = key_of(node);
            let entry = out.nodes.entry(key.clone()).or_insert((0, 0));
            entry.0 += degree;
            if seen.insert(key) {
                entry.1 += 1;
            }
        }
        for e in g.edges() {
            let k = (key_of(g.node(e.source)), e.role.clone(), key_of(g.node(e.target)));
            *out.edges.entry(k).or_insert(0) += 1;
        }
    }
    out
}

pub fn as_brute(meta: &MetaGraph) -> BruteMeta {
    BruteMeta {
        nodes: meta.nodes().map(|n| (n.key.clone(), (n.weight, n.graph_count))).collect(),
        edges: meta
            .edges()
            .map(|e| ((e.source.clone(), e.role.clone(), e.target.clone()), e.weight))
            .collect(),
    }
}

/// Components by repeated minimum-label propagation until nothing changes.
pub fn brute_components(meta: &MetaGraph) -> Vec<BTreeSet<String>> {
    let keys: Vec<String> = meta.nodes().map(|n| n.key.clone()).collect();
    let index: BTreeMap<&str, usize> = keys.iter().enumerate().map(|(i, k)| (k.as_str(), i)).collect();
    let mut label: Vec<usize> = (0..keys.len()).collect();
    loop {
        let mut changed = false;
        for e in meta.edges() {
            let (s, t) = (index[e.source.as_str()], index[e.target.as_str()]);
            let m = label[s].min(label[t]);
            if label[s] != m || label[t] != m {
                label[s] = m;
                label[t] = m;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let mut groups: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
    for (i, k) in keys.into_iter().enumerate() {
        groups.entry(label[i]).or_default().insert(k);
    }
    groups.into_values().collect()
}

/// Largest component: most nodes, then most total node weight, then the one
/// holding the smallest key.
pub fn brute_largest(meta: &MetaGraph) -> BTreeSet<String> {
    let weight = |c: &BTreeSet<String>| -> u64 { c.iter().map(|k| meta.node(k).unwrap().weight).sum() };
    let mut best: Option<BTreeSet<String>> = None;
    for c in brute_components(meta) {
        best = match best {
            None => Some(c),
            Some(b) => {
                let better = c.len() > b.len()
                    || (c.len() == b.len() && weight(&c) > weight(&b))
                    || (c.len() == b.len() && weight(&c) == weight(&b) && c.first() < b.first());
                Some(if better { c } else { b })
            }
        };
    }
    best.unwrap_or_default()
}

/// A random metagraph with at most 50 nodes, usually fragmented.
pub fn random_metagraph<R: Rng>(rng: &mut R) -> MetaGraph {
    let n = rng.random_range(0..=50);
    let nodes: Vec<GraphJsonNode> = (0..n)
        .map(|i| GraphJsonNode {
            key: format!("n{i:02}"),
            kind: NodeKind::Concept,
            weight: rng.random_range(1..5),
            graph_count: 1,
        })
        .collect();
    let mut edges = BTreeMap::new();
    if n > 0 {
        for _ in 0..rng.random_range(0..=n) {
            let s = rng.random_range(0..n);
            let t = rng.random_range(0..n);
            edges.insert((s, t), rng.random_range(1..4));
        }
    }
    let doc = GraphJson {
        version: GRAPH_JSON_VERSION,
        n_source_graphs: 1,
        nodes,
        edges: edges
            .into_iter()
            .map(|((s, t), w)| GraphJsonEdge {
                source: format!("n{s:02}"),
                role: ":r".into(),
                target: format!("n{t:02}"),
                weight: w,
            })
            .collect(),
    };
    MetaGraph::from_graph_json(&doc).unwrap()
}

pub fn key_set(meta: &MetaGraph) -> BTreeSet<String> {
    meta.nodes().map(|n| n.key.clone()).collect()
}

/// Cosine similarity with plain loops.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let mut ab = 0.0;
    let mut aa = 0.0;
    let mut bb = 0.0;
    for i in 0..a.len() {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    ab / (aa.sqrt() * bb.sqrt())
}

/// Two-pass mean and population variance.
pub fn mean_and_population_variance(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var)
}

/// Two-pass mean and standard error (sample deviation over sqrt(n)).
pub fn mean_and_sem(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let ss = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>();
    (mean, (ss / (n - 1.0)).sqrt() / n.sqrt())
}

/// Random vector in [-1, 1]^d that is not too close to zero.
pub fn random_vector<R: Rng>(rng: &mut R, d: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        if v.iter().map(|x| x * x).sum::<f64>() > 1e-3 {
            return v;
        }
    }
}
