//! Precomputed provider outputs stored on disk and keyed by document id.
//!
//! A fixture directory holds up to three files:
//!
//! - `embeddings.jsonl`: `{"id": ..., "vector": [...]}` per line
//! - `label_probs.jsonl`: `{"id": ..., "probs": [...]}` per line, in label-set order
//! - `parses.amr`: AMR blocks, each headed by `# ::id <document id>`
//!
//! Every record is validated when loaded. A file that is absent only fails
//! when one of its records is requested.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    validate, AmrParseProvider, EmbeddingProvider, FixtureKind, LabelProbabilityProvider,
    ProviderError, ProviderStatus, TextItem,
};
use crate::amr::{parse_amr_file, parse_penman};
use crate::labels::LabelSet;

pub const EMBEDDINGS_FILE: &str = "embeddings.jsonl";
pub const LABEL_PROBS_FILE: &str = "label_probs.jsonl";
pub const PARSES_FILE: &str = "parses.amr";

#[derive(Serialize, Deserialize)]
struct EmbeddingRecord {
    id: String,
    vector: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct LabelRecord {
    id: String,
    probs: Vec<f64>,
}

#[derive(Debug, Clone)]
struct Entry<T> {
    line: usize,
    value: T,
}

#[derive(Debug, Clone, Default)]
struct Table<T> {
    file: &'static str,
    entries: HashMap<String, Entry<T>>,
}

impl<T> Table<T> {
    fn new(file: &'static str) -> Self {
        Table {
            file,
            entries: HashMap::new(),
        }
    }

    fn malformed(&self, line: usize, reason: impl Into<String>) -> ProviderError {
        ProviderError::MalformedFixture {
            file: self.file.to_string(),
            line,
            reason: reason.into(),
        }
    }

    fn insert(&mut self, id: String, line: usize, value: T) -> Result<(), ProviderError> {
        if let Some(first) = self.entries.get(&id) {
            return Err(self.malformed(
                line,
                format!("duplicate id {id:?} (first seen on line {})", first.line),
            ));
        }
        self.entries.insert(id, Entry { line, value });
        Ok(())
    }

    fn get(&self, kind: FixtureKind, id: &str) -> Result<&Entry<T>, ProviderError> {
        self.entries.get(id).ok_or_else(|| ProviderError::MissingFixture {
            kind,
            id: id.to_string(),
        })
    }
}

/// Ids requested but absent, per fixture kind.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct FixtureCoverage {
    pub requested: usize,
    pub missing: BTreeMap<FixtureKind, Vec<String>>,
}

impl FixtureCoverage {
    pub fn is_complete(&self) -> bool {
        self.missing.values().all(Vec::is_empty)
    }
}

#[derive(Debug, Clone)]
pub struct FixtureStore {
    dir: Option<PathBuf>,
    embeddings: Table<Vec<f64>>,
    label_probs: Table<Vec<f64>>,
    parses: Table<String>,
    dimension: Option<usize>,
    n_labels: Option<usize>,
}

impl Default for FixtureStore {
    fn default() -> Self {
        Self::new()
    }
}

fn jsonl_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn read_optional(path: &Path) -> Result<Option<String>, ProviderError> {
    match fs::read_to_string(path) {
        Ok(text) => Ok(Some(text)),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
        Err(e) => Err(ProviderError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        }),
    }
}

impl FixtureStore {
    /// An empty in-memory store.
    pub fn new() -> Self {
        FixtureStore {
            dir: None,
            embeddings: Table::new(EMBEDDINGS_FILE),
            label_probs: Table::new(LABEL_PROBS_FILE),
            parses: Table::new(PARSES_FILE),
            dimension: None,
            n_labels: None,
        }
    }

    pub fn load(dir: &Path) -> Result<Self, ProviderError> {
        if !dir.is_dir() {
            return Err(ProviderError::Io {
                path: dir.display().to_string(),
                reason: "not a directory".into(),
            });
        }
        let mut store = FixtureStore::new();
        store.dir = Some(dir.to_path_buf());
        if let Some(text) = read_optional(&dir.join(EMBEDDINGS_FILE))? {
            store.load_embeddings(&text)?;
        }
        if let Some(text) = read_optional(&dir.join(LABEL_PROBS_FILE))? {
            store.load_label_probs(&text)?;
        }
        if let Some(text) = read_optional(&dir.join(PARSES_FILE))? {
            store.load_parses(&text)?;
        }
        Ok(store)
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    pub fn load_embeddings(&mut self, text: &str) -> Result<(), ProviderError> {
        for (line, raw) in jsonl_lines(text) {
            let record: EmbeddingRecord = serde_json::from_str(raw)
                .map_err(|e| self.embeddings.malformed(line, e.to_string()))?;
            self.add_embedding(record.id, record.vector, line)?;
        }
        Ok(())
    }

    pub fn load_label_probs(&mut self, text: &str) -> Result<(), ProviderError> {
        for (line, raw) in jsonl_lines(text) {
            let record: LabelRecord = serde_json::from_str(raw)
                .map_err(|e| self.label_probs.malformed(line, e.to_string()))?;
            self.add_label_probs(record.id, record.probs, line)?;
        }
        Ok(())
    }

    pub fn load_parses(&mut self, text: &str) -> Result<(), ProviderError> {
        let blocks = parse_amr_file(text).map_err(|e| {
            let line = match &e {
                crate::amr::AmrError::File { line, .. } => *line,
                _ => 0,
            };
            self.parses.malformed(line, e.to_string())
        })?;
        for block in blocks {
            let Some(id) = block.id else {
                return Err(self.parses.malformed(block.line, "block has no # ::id line"));
            };
            self.add_parse(id, block.penman, block.penman_line)?;
        }
        Ok(())
    }

    fn add_embedding(&mut self, id: String, vector: Vec<f64>, line: usize) -> Result<(), ProviderError> {
        validate::embedding(&vector, self.dimension).map_err(|r| self.embeddings.malformed(line, r))?;
        self.dimension = Some(vector.len());
        self.embeddings.insert(id, line, vector)
    }

    fn add_label_probs(&mut self, id: String, probs: Vec<f64>, line: usize) -> Result<(), ProviderError> {
        let width = self.n_labels.unwrap_or(probs.len());
        if width == 0 {
            return Err(self.label_probs.malformed(line, "empty probability vector"));
        }
        validate::probabilities(&probs, width).map_err(|r| self.label_probs.malformed(line, r))?;
        self.n_labels = Some(width);
        self.label_probs.insert(id, line, probs)
    }

    fn add_parse(&mut self, id: String, penman: String, line: usize) -> Result<(), ProviderError> {
        if let Err(e) = parse_penman(&penman) {
            let at = e.position().map_or(line, |p| line + p.line - 1);
            return Err(self.parses.malformed(at, e.to_string()));
        }
        self.parses.insert(id, line, penman)
    }

    pub fn insert_embedding(&mut self, id: impl Into<String>, vector: Vec<f64>) -> Result<(), ProviderError> {
        self.add_embedding(id.into(), vector, 0)
    }

    pub fn insert_label_probs(&mut self, id: impl Into<String>, probs: Vec<f64>) -> Result<(), ProviderError> {
        self.add_label_probs(id.into(), probs, 0)
    }

    pub fn insert_parse(&mut self, id: impl Into<String>, penman: impl Into<String>) -> Result<(), ProviderError> {
        self.add_parse(id.into(), penman.into(), 0)
    }

    /// Embedding dimension shared by all records, once any is present.
    pub fn dimension(&self) -> Option<usize> {
        self.dimension
    }

    pub fn embedding(&self, id: &str) -> Result<&[f64], ProviderError> {
        Ok(&self.embeddings.get(FixtureKind::Embeddings, id)?.value)
    }

    pub fn label_probs(&self, id: &str) -> Result<&[f64], ProviderError> {
        Ok(&self.label_probs.get(FixtureKind::Labels, id)?.value)
    }

    pub fn parse(&self, id: &str) -> Result<&str, ProviderError> {
        Ok(&self.parses.get(FixtureKind::Amr, id)?.value)
    }

    pub fn contains(&self, kind: FixtureKind, id: &str) -> bool {
        match kind {
            FixtureKind::Embeddings => self.embeddings.entries.contains_key(id),
            FixtureKind::Labels => self.label_probs.entries.contains_key(id),
            FixtureKind::Amr => self.parses.entries.contains_key(id),
        }
    }

    /// Number of records per kind.
    pub fn counts(&self) -> BTreeMap<FixtureKind, usize> {
        BTreeMap::from([
            (FixtureKind::Labels, self.label_probs.entries.len()),
            (FixtureKind::Embeddings, self.embeddings.entries.len()),
            (FixtureKind::Amr, self.parses.entries.len()),
        ])
    }

    /// Which of `kinds` lack a record for some id in `ids`.
    pub fn coverage(&self, ids: &[&str], kinds: &[FixtureKind]) -> FixtureCoverage {
        let missing = kinds
            .iter()
            .map(|&k| {
                let absent = ids
                    .iter()
                    .filter(|id| !self.contains(k, id))
                    .map(|id| id.to_string())
                    .collect();
                (k, absent)
            })
            .collect();
        FixtureCoverage {
            requested: ids.len(),
            missing,
        }
    }

    /// Writes all records to `dir` in the fixture file formats, sorted by id.
    pub fn save(&self, dir: &Path) -> Result<(), ProviderError> {
        fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
        let mut writer = FixtureWriter::new(dir);
        let embeddings = sorted_entries(&self.embeddings);
        let labels = sorted_entries(&self.label_probs);
        let parses = sorted_entries(&self.parses);
        writer.truncate()?;
        writer.append_embeddings(embeddings.iter().map(|(id, v)| (id.as_str(), v.as_slice())))?;
        writer.append_label_probs(labels.iter().map(|(id, v)| (id.as_str(), v.as_slice())))?;
        writer.append_parses(parses.iter().map(|(id, p)| (id.as_str(), p.as_str())))?;
        Ok(())
    }

    fn label_rows(&self, items: &[TextItem<'_>], labels: &LabelSet) -> Result<Vec<Vec<f64>>, ProviderError> {
        items
            .iter()
            .map(|item| {
                let entry = self.label_probs.get(FixtureKind::Labels, item.id)?;
                validate::probabilities(&entry.value, labels.len())
                    .map_err(|r| self.label_probs.malformed(entry.line, format!("{}: {r}", item.id)))?;
                Ok(entry.value.clone())
            })
            .collect()
    }
}

fn sorted_entries<T>(table: &Table<T>) -> Vec<(&String, &T)> {
    let mut v: Vec<(&String, &T)> = table.entries.iter().map(|(k, e)| (k, &e.value)).collect();
    v.sort_by(|a, b| a.0.cmp(b.0));
    v
}

fn io_error(path: &Path, e: std::io::Error) -> ProviderError {
    ProviderError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    }
}

impl LabelProbabilityProvider for FixtureStore {
    fn label_probabilities(
        &self,
        items: &[TextItem<'_>],
        labels: &LabelSet,
    ) -> Result<Vec<Vec<f64>>, ProviderError> {
        self.label_rows(items, labels)
    }
}

impl EmbeddingProvider for FixtureStore {
    fn embeddings(&self, items: &[TextItem<'_>]) -> Result<Vec<Vec<f64>>, ProviderError> {
        items
            .iter()
            .map(|item| self.embedding(item.id).map(<[f64]>::to_vec))
            .collect()
    }
}

impl AmrParseProvider for FixtureStore {
    fn parses(&self, items: &[TextItem<'_>]) -> Result<Vec<String>, ProviderError> {
        items
            .iter()
            .map(|item| self.parse(item.id).map(str::to_string))
            .collect()
    }
}

impl ProviderStatus for FixtureStore {
    fn mode(&self) -> &'static str {
        "fixtures"
    }

    fn probe(&self) -> Result<(), ProviderError> {
        match &self.dir {
            Some(dir) if !dir.is_dir() => Err(ProviderError::Io {
                path: dir.display().to_string(),
                reason: "fixture directory is gone".into(),
            }),
            _ => Ok(()),
        }
    }
}

/// Appends records to the fixture files of a directory.
#[derive(Debug, Clone)]
pub struct FixtureWriter {
    dir: PathBuf,
}

impl FixtureWriter {
    pub fn new(dir: &Path) -> Self {
        FixtureWriter {
            dir: dir.to_path_buf(),
        }
    }

    fn truncate(&mut self) -> Result<(), ProviderError> {
        for name in [EMBEDDINGS_FILE, LABEL_PROBS_FILE, PARSES_FILE] {
            let path = self.dir.join(name);
            fs::write(&path, "").map_err(|e| io_error(&path, e))?;
        }
        Ok(())
    }

    fn append(&self, name: &str, text: &str) -> Result<(), ProviderError> {
        if text.is_empty() {
            return Ok(());
        }
        let path = self.dir.join(name);
        let mut file = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| io_error(&path, e))?;
        file.write_all(text.as_bytes()).map_err(|e| io_error(&path, e))
    }

    pub fn append_embeddings<'a>(
        &self,
        records: impl IntoIterator<Item = (&'a str, &'a [f64])>,
    ) -> Result<(), ProviderError> {
        let mut text = String::new();
        for (id, vector) in records {
            let record = EmbeddingRecord {
                id: id.to_string(),
                vector: vector.to_vec(),
            };
            text.push_str(&serde_json::to_string(&record).expect("finite floats serialize"));
            text.push('\n');
        }
        self.append(EMBEDDINGS_FILE, &text)
    }

    pub fn append_label_probs<'a>(
        &self,
        records: impl IntoIterator<Item = (&'a str, &'a [f64])>,
    ) -> Result<(), ProviderError> {
        let mut text = String::new();
        for (id, probs) in records {
            let record = LabelRecord {
                id: id.to_string(),
                probs: probs.to_vec(),
            };
            text.push_str(&serde_json::to_string(&record).expect("finite floats serialize"));
            text.push('\n');
        }
        self.append(LABEL_PROBS_FILE, &text)
    }

    pub fn append_parses<'a>(
        &self,
        records: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<(), ProviderError> {
        let mut text = String::new();
        for (id, penman) in records {
            text.push_str(&format!("# ::id {id}\n{}\n\n", penman.trim_end()));
        }
        self.append(PARSES_FILE, &text)
    }
}
