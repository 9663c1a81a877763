//! Seeded generator of headline-like corpora together with matching fixture
//! records, for load tests and demos without any model.
//!
//! Concepts, entities and names are drawn from Zipf-like distributions so
//! that a few nodes dominate the metagraph, as they do in real news corpora.

use std::collections::HashMap;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::amr::{serialize_penman, AmrEdge, AmrGraph, AmrNode};
use crate::axes::Pole;
use crate::config::AnalysisConfig;
use crate::corpus::{Corpus, CorpusError};
use crate::providers::{FixtureStore, ProviderError};

const PREDICATES: &[&str] = &[
    "shoot-02", "kill-01", "say-01", "arrest-01", "die-01", "wound-01", "charge-05", "report-01",
    "attack-01", "protest-01", "ban-01", "call-03", "oppose-01", "support-01", "pass-01", "sign-01",
    "vote-01", "injure-01", "open-01", "fire-01", "threaten-01", "investigate-01", "mourn-01",
    "demand-01", "propose-01", "rally-01", "sue-01", "defend-01", "urge-01", "reject-01",
];
const ENTITIES: &[&str] = &[
    "person", "police", "government-organization", "student", "officer", "suspect", "gunman",
    "lawmaker", "teacher", "group", "company", "child", "senator", "court", "victim", "family",
];
const THINGS: &[&str] = &[
    "gun", "law", "school", "shooting", "violence", "bill", "rifle", "church", "control-01",
    "right-05", "safety", "weapon", "store", "ban-01", "rally", "legislation",
];
const SURNAMES: &[&str] = &[
    "Smith", "Johnson", "Garcia", "Brown", "Miller", "Davis", "Lopez", "Wilson", "Moore", "Clark",
    "Lewis", "Young", "Allen", "King", "Scott", "Green", "Baker", "Adams", "Nelson", "Hill",
];
const CITIES: &[&str] = &[
    "Chicago", "Houston", "Denver", "Dallas", "Orlando", "Boston", "Austin", "Phoenix", "Seattle",
    "Atlanta",
];

/// Number of words of long-tail vocabulary appended to each list.
const LONG_TAIL: usize = 40;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticOptions {
    pub n_documents: usize,
    pub dimension: usize,
    pub seed: u64,
    /// File name of the corpus; document ids are `<source_name>:<ordinal>`.
    pub source_name: String,
}

impl Default for SyntheticOptions {
    fn default() -> Self {
        SyntheticOptions {
            n_documents: 2990,
            dimension: 16,
            seed: 7,
            source_name: "synthetic.txt".to_string(),
        }
    }
}

/// A corpus and fixtures covering every document and axis pole.
#[derive(Debug, Clone)]
pub struct SyntheticData {
    /// The corpus file contents, one headline per line.
    pub text: String,
    pub corpus: Corpus,
    pub store: FixtureStore,
}

impl SyntheticData {
    /// Writes the corpus file and the fixture files into `dir`.
    pub fn write(&self, dir: &Path) -> Result<(), ProviderError> {
        self.store.save(dir)?;
        let path = dir.join(&self.corpus.source_name);
        std::fs::write(&path, &self.text).map_err(|e| ProviderError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })
    }
}

struct Vocabulary {
    words: Vec<String>,
    index: WeightedIndex<f64>,
}

impl Vocabulary {
    fn new(head: &[&str], tail_prefix: &str, exponent: f64) -> Self {
        let mut words: Vec<String> = head.iter().map(|w| w.to_string()).collect();
        words.extend((0..LONG_TAIL).map(|k| format!("{tail_prefix}{k}")));
        let weights: Vec<f64> = (1..=words.len()).map(|r| (r as f64).powf(-exponent)).collect();
        Vocabulary {
            words,
            index: WeightedIndex::new(weights).expect("positive weights"),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> &str {
        &self.words[self.index.sample(rng)]
    }
}

struct GraphBuilder {
    nodes: Vec<AmrNode>,
    edges: Vec<AmrEdge>,
    used: HashMap<char, usize>,
}

impl GraphBuilder {
    fn new() -> Self {
        GraphBuilder {
            nodes: Vec::new(),
            edges: Vec::new(),
            used: HashMap::new(),
        }
    }

    fn concept(&mut self, label: &str) -> usize {
        let letter = label
            .chars()
            .next()
            .filter(char::is_ascii_lowercase)
            .unwrap_or('x');
        let n = self.used.entry(letter).or_insert(0);
        let variable = if *n == 0 { letter.to_string() } else { format!("{letter}{n}") };
        *n += 1;
        self.nodes.push(AmrNode::concept(variable, label));
        self.nodes.len() - 1
    }

    fn constant(&mut self, literal: &str, quoted: bool) -> usize {
        self.nodes.push(AmrNode::constant(literal, quoted));
        self.nodes.len() - 1
    }

    fn edge(&mut self, source: usize, role: &str, target: usize) {
        self.edges.push(AmrEdge::new(source, role, target));
    }

    fn inverted_edge(&mut self, source: usize, role: &str, target: usize) {
        let mut e = AmrEdge::new(source, role, target);
        e.inverted = true;
        self.edges.push(e);
    }

    fn named(&mut self, head: &str, name: &str) -> usize {
        let node = self.concept(head);
        let n = self.concept("name");
        let literal = self.constant(name, true);
        self.edge(node, ":name", n);
        self.edge(n, ":op1", literal);
        node
    }

    fn build(self) -> AmrGraph {
        AmrGraph::from_parts(self.nodes, self.edges, 0).expect("generated graphs are valid")
    }
}

struct Generator {
    rng: ChaCha8Rng,
    predicates: Vocabulary,
    entities: Vocabulary,
    things: Vocabulary,
    surnames: Vocabulary,
    cities: Vocabulary,
}

fn words_of(label: &str) -> String {
    let base = label.rsplit_once('-').filter(|(_, s)| s.chars().all(|c| c.is_ascii_digit())).map_or(label, |(b, _)| b);
    base.replace('-', " ")
}

impl Generator {
    fn new(seed: u64) -> Self {
        Generator {
            rng: ChaCha8Rng::seed_from_u64(seed),
            predicates: Vocabulary::new(PREDICATES, "event-", 1.1),
            entities: Vocabulary::new(ENTITIES, "actor-", 1.3),
            things: Vocabulary::new(THINGS, "object-", 1.1),
            surnames: Vocabulary::new(SURNAMES, "Name", 1.0),
            cities: Vocabulary::new(CITIES, "Town", 1.0),
        }
    }

    /// One graph and a headline built from its concepts.
    fn document(&mut self) -> (AmrGraph, String) {
        let mut g = GraphBuilder::new();
        let mut words = Vec::new();
        let predicate = self.predicates.sample(&mut self.rng).to_string();
        let root = g.concept(&predicate);

        let mut agent = None;
        if self.rng.random_bool(0.75) {
            let entity = self.entities.sample(&mut self.rng).to_string();
            let node = if entity == "person" && self.rng.random_bool(0.5) {
                let name = self.surnames.sample(&mut self.rng).to_string();
                words.push(name.clone());
                g.named("person", &name)
            } else {
                words.push(words_of(&entity));
                g.concept(&entity)
            };
            g.edge(root, ":ARG0", node);
            agent = Some(node);
        }
        words.push(words_of(&predicate));

        if self.rng.random_bool(0.65) {
            let thing = self.things.sample(&mut self.rng).to_string();
            let node = g.concept(&thing);
            g.edge(root, ":ARG1", node);
            if self.rng.random_bool(0.2) {
                let n = self.rng.random_range(2..30u32).to_string();
                let q = g.constant(&n, false);
                g.edge(node, ":quant", q);
                words.push(n);
            }
            words.push(words_of(&thing));
        }
        if self.rng.random_bool(0.3) {
            let city = self.cities.sample(&mut self.rng).to_string();
            let node = g.named("city", &city);
            g.edge(root, ":location", node);
            words.push(format!("in {city}"));
        }
        if self.rng.random_bool(0.15) {
            let minus = g.constant("-", false);
            g.edge(root, ":polarity", minus);
            words.insert(0, "No".to_string());
        }
        if let Some(agent) = agent {
            if self.rng.random_bool(0.25) {
                let second = self.predicates.sample(&mut self.rng).to_string();
                let node = g.concept(&second);
                g.edge(root, ":purpose", node);
                g.edge(node, ":ARG0", agent);
                words.push(format!("to {}", words_of(&second)));
            }
            if self.rng.random_bool(0.2) {
                let modifier = self.predicates.sample(&mut self.rng).to_string();
                let node = g.concept(&modifier);
                g.inverted_edge(node, ":ARG1", agent);
                words.push(format!("after {}", words_of(&modifier)));
            }
        }

        let mut headline = words.join(" ");
        if let Some(first) = headline.get(..1) {
            headline = first.to_uppercase() + &headline[1..];
        }
        (g.build(), headline)
    }

    fn vector(&mut self, dimension: usize) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..dimension).map(|_| self.rng.random_range(-1.0..1.0)).collect();
            if v.iter().any(|&x| x != 0.0) {
                return v;
            }
        }
    }
}

/// Generates a corpus and fixtures for `config`'s label set and axis poles.
pub fn generate(options: &SyntheticOptions, config: &AnalysisConfig) -> Result<SyntheticData, CorpusError> {
    let mut gen = Generator::new(options.seed);
    let dimension = options.dimension.max(2);
    let mut graphs = Vec::with_capacity(options.n_documents);
    let mut lines = Vec::with_capacity(options.n_documents);
    for _ in 0..options.n_documents {
        let (graph, headline) = gen.document();
        graphs.push(graph);
        lines.push(headline);
    }
    let mut text = lines.join("\n");
    text.push('\n');
    let corpus = Corpus::split_named(&options.source_name, &text, true)?;

    let base: Vec<f64> = (0..config.labels.len()).map(|_| gen.rng.random_range(0.05..0.8)).collect();
    let mut store = FixtureStore::new();
    for (doc, graph) in corpus.documents().iter().zip(&graphs) {
        let probs: Vec<f64> = base
            .iter()
            .map(|b| (b + gen.rng.random_range(-0.25..0.25)).clamp(0.0, 1.0))
            .collect();
        let embedding = gen.vector(dimension);
        store.insert_label_probs(&doc.id, probs).expect("generated probabilities are valid");
        store.insert_embedding(&doc.id, embedding).expect("generated embeddings are valid");
        store
            .insert_parse(&doc.id, serialize_penman(graph))
            .expect("generated parses are valid");
    }
    for axis in config.axes.axes() {
        for pole in [Pole::Vice, Pole::Virtue] {
            for id in axis.pole_ids(pole) {
                let v = gen.vector(dimension);
                store.insert_embedding(id, v).expect("generated embeddings are valid");
            }
        }
    }
    Ok(SyntheticData { text, corpus, store })
}
