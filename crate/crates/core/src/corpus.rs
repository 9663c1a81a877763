//! Corpus ingestion: raw text or files in, ordered documents with stable ids out.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Source name used for text that did not come from a file.
pub const INLINE_SOURCE: &str = "inline";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("corpus contains no non-blank content")]
    EmptyCorpus,
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path} is not valid UTF-8 (first invalid byte at offset {offset})")]
    Encoding { path: String, offset: usize },
    #[error("line {line}: {reason}")]
    MalformedRecord { line: usize, reason: String },
    #[error("duplicate document id {0:?}")]
    DuplicateId(String),
}

/// One unit of analysis. `text` is trimmed and never empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub ordinal: usize,
}

/// How raw input was turned into documents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// One document per non-blank line.
    Lines,
    /// The whole input is a single document.
    Single,
    /// Documents were supplied pre-identified (JSONL or a list of texts).
    Records,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Corpus {
    pub source_name: String,
    pub split_mode: SplitMode,
    documents: Vec<Document>,
}

fn normalize_line_endings(raw: &str) -> String {
    raw.replace("\r\n", "\n").replace('\r', "\n")
}

fn document_id(source_name: &str, ordinal: usize) -> String {
    format!("{source_name}:{ordinal}")
}

impl Corpus {
    /// Splits inline text, using [`INLINE_SOURCE`] as the source name.
    pub fn split_into_documents(raw: &str, split_on_newlines: bool) -> Result<Self, CorpusError> {
        Self::split_named(INLINE_SOURCE, raw, split_on_newlines)
    }

    /// Splits `raw` into documents whose ids are `"{source_name}:{ordinal}"`.
    ///
    /// With `split_on_newlines`, every non-blank line (trimmed) becomes one
    /// document; blank and whitespace-only lines are dropped. Otherwise the
    /// whole trimmed text is one document.
    pub fn split_named(
        source_name: &str,
        raw: &str,
        split_on_newlines: bool,
    ) -> Result<Self, CorpusError> {
        let normalized = normalize_line_endings(raw);
        let texts: Vec<&str> = if split_on_newlines {
            normalized
                .split('\n')
                .map(str::trim)
                .filter(|line| !line.is_empty())
                .collect()
        } else {
            let trimmed = normalized.trim();
            if trimmed.is_empty() {
                Vec::new()
            } else {
                vec![trimmed]
            }
        };
        if texts.is_empty() {
            return Err(CorpusError::EmptyCorpus);
        }
        let documents = texts
            .into_iter()
            .enumerate()
            .map(|(ordinal, text)| Document {
                id: document_id(source_name, ordinal),
                text: text.to_string(),
                ordinal,
            })
            .collect();
        Ok(Corpus {
            source_name: source_name.to_string(),
            split_mode: if split_on_newlines {
                SplitMode::Lines
            } else {
                SplitMode::Single
            },
            documents,
        })
    }

    /// Reads a plain-text UTF-8 file; the source name is the file name.
    pub fn load_file(path: &Path, split_on_newlines: bool) -> Result<Self, CorpusError> {
        let raw = read_utf8(path)?;
        Self::split_named(&source_name_of(path), &raw, split_on_newlines)
    }

    /// Reads a JSONL corpus where every non-blank line is `{"id": .., "text": ..}`.
    pub fn load_jsonl(path: &Path) -> Result<Self, CorpusError> {
        let raw = read_utf8(path)?;
        Self::parse_jsonl(&source_name_of(path), &raw)
    }

    pub fn parse_jsonl(source_name: &str, raw: &str) -> Result<Self, CorpusError> {
        #[derive(Deserialize)]
        struct Record {
            id: String,
            text: String,
        }

        let mut records = Vec::new();
        for (idx, line) in normalize_line_endings(raw).split('\n').enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let record: Record =
                serde_json::from_str(line).map_err(|e| CorpusError::MalformedRecord {
                    line: idx + 1,
                    reason: e.to_string(),
                })?;
            records.push((idx + 1, record.id, record.text));
        }
        Self::from_records(source_name, records)
    }

    /// Builds a corpus from `(id, text)` pairs, keeping their order.
    pub fn from_texts<I, S, T>(source_name: &str, texts: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: AsRef<str>,
    {
        let records = texts
            .into_iter()
            .enumerate()
            .map(|(i, (id, text))| (i + 1, id.into(), text.as_ref().to_string()));
        Self::from_records(source_name, records)
    }

    fn from_records(
        source_name: &str,
        records: impl IntoIterator<Item = (usize, String, String)>,
    ) -> Result<Self, CorpusError> {
        let mut seen = HashSet::new();
        let mut documents = Vec::new();
        for (line, id, text) in records {
            let text = text.trim();
            if text.is_empty() {
                return Err(CorpusError::MalformedRecord {
                    line,
                    reason: format!("document {id:?} has empty text"),
                });
            }
            if id.is_empty() {
                return Err(CorpusError::MalformedRecord {
                    line,
                    reason: "empty document id".into(),
                });
            }
            if !seen.insert(id.clone()) {
                return Err(CorpusError::DuplicateId(id));
            }
            documents.push(Document {
                id,
                text: text.to_string(),
                ordinal: documents.len(),
            });
        }
        if documents.is_empty() {
            return Err(CorpusError::EmptyCorpus);
        }
        Ok(Corpus {
            source_name: source_name.to_string(),
            split_mode: SplitMode::Records,
            documents,
        })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Reorders documents by `order` (indices into the current document list)
    /// while keeping their ids. Ordinals are renumbered to stay contiguous.
    ///
    /// Panics if `order` is not a permutation of `0..len`.
    pub fn permuted(&self, order: &[usize]) -> Corpus {
        assert_eq!(order.len(), self.documents.len(), "not a permutation");
        let mut used = vec![false; order.len()];
        let documents = order
            .iter()
            .enumerate()
            .map(|(ordinal, &i)| {
                assert!(!std::mem::replace(&mut used[i], true), "not a permutation");
                Document {
                    ordinal,
                    ..self.documents[i].clone()
                }
            })
            .collect();
        Corpus {
            documents,
            ..self.clone()
        }
    }
}

fn source_name_of(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn read_utf8(path: &Path) -> Result<String, CorpusError> {
    let bytes = fs::read(path).map_err(|source| CorpusError::Io {
        path: path.display().to_string(),
        source,
    })?;
    String::from_utf8(bytes).map_err(|e| CorpusError::Encoding {
        path: path.display().to_string(),
        offset: e.utf8_error().valid_up_to(),
    })
}
