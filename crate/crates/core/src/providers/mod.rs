//! Where model outputs come from: label probabilities, document embeddings
//! and AMR parses are obtained through the traits below, backed either by
//! precomputed fixture files or by a remote inference service.

mod cache;
mod fixtures;
mod http;
pub mod validate;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::Document;
use crate::labels::LabelSet;

pub use cache::CachedProvider;
pub use fixtures::{FixtureCoverage, FixtureStore, FixtureWriter, EMBEDDINGS_FILE, LABEL_PROBS_FILE, PARSES_FILE};
pub use http::{HttpProvider, DEFAULT_BATCH_SIZE, WIRE_VERSION};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ProviderError {
    #[error("no {kind} fixture for document {id:?}")]
    MissingFixture { kind: FixtureKind, id: String },
    #[error("{file} line {line}: {reason}")]
    MalformedFixture {
        file: String,
        line: usize,
        reason: String,
    },
    #[error("cannot access {path}: {reason}")]
    Io { path: String, reason: String },
    #[error("transport error: {0}")]
    Transport(String),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("remote error: {0}")]
    Remote(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FixtureKind {
    Labels,
    Embeddings,
    Amr,
}

impl FixtureKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FixtureKind::Labels => "labels",
            FixtureKind::Embeddings => "embeddings",
            FixtureKind::Amr => "amr",
        }
    }
}

impl std::fmt::Display for FixtureKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A text to run through a model, with the id its fixtures are keyed by.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TextItem<'a> {
    pub id: &'a str,
    pub text: &'a str,
}

impl<'a> From<&'a Document> for TextItem<'a> {
    fn from(doc: &'a Document) -> Self {
        TextItem {
            id: &doc.id,
            text: &doc.text,
        }
    }
}

/// Outputs are aligned 1:1 with `items`; each vector has `labels.len()`
/// entries in [0, 1].
pub trait LabelProbabilityProvider: Send + Sync {
    fn label_probabilities(
        &self,
        items: &[TextItem<'_>],
        labels: &LabelSet,
    ) -> Result<Vec<Vec<f64>>, ProviderError>;
}

/// Outputs are aligned 1:1 with `items`, share one dimension of at least 2,
/// and are finite with nonzero norm.
pub trait EmbeddingProvider: Send + Sync {
    fn embeddings(&self, items: &[TextItem<'_>]) -> Result<Vec<Vec<f64>>, ProviderError>;
}

/// Outputs are aligned 1:1 with `items`; each is one PENMAN expression.
pub trait AmrParseProvider: Send + Sync {
    fn parses(&self, items: &[TextItem<'_>]) -> Result<Vec<String>, ProviderError>;
}

/// Reachability of whatever backs a provider set.
pub trait ProviderStatus: Send + Sync {
    /// Short name of the backend, e.g. "fixtures".
    fn mode(&self) -> &'static str;
    fn probe(&self) -> Result<(), ProviderError>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderHealth {
    pub mode: String,
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// The three providers an analysis needs, plus a health probe.
#[derive(Clone)]
pub struct ProviderSet {
    pub labels: Arc<dyn LabelProbabilityProvider>,
    pub embeddings: Arc<dyn EmbeddingProvider>,
    pub amr: Arc<dyn AmrParseProvider>,
    pub status: Arc<dyn ProviderStatus>,
}

impl ProviderSet {
    pub fn fixtures(store: FixtureStore) -> Self {
        let store = Arc::new(store);
        ProviderSet {
            labels: store.clone(),
            embeddings: store.clone(),
            amr: store.clone(),
            status: store,
        }
    }

    pub fn http(provider: HttpProvider) -> Self {
        let provider = Arc::new(provider);
        ProviderSet {
            labels: provider.clone(),
            embeddings: provider.clone(),
            amr: provider.clone(),
            status: provider,
        }
    }

    /// Remote providers whose results are appended to fixture files and
    /// served from there on later requests.
    pub fn cached_http(cache: CachedProvider<HttpProvider>) -> Self {
        let cache = Arc::new(cache);
        ProviderSet {
            labels: cache.clone(),
            embeddings: cache.clone(),
            amr: cache.clone(),
            status: cache,
        }
    }

    pub fn mode(&self) -> &'static str {
        self.status.mode()
    }

    pub fn health(&self) -> ProviderHealth {
        match self.status.probe() {
            Ok(()) => ProviderHealth {
                mode: self.mode().to_string(),
                ok: true,
                detail: None,
            },
            Err(e) => ProviderHealth {
                mode: self.mode().to_string(),
                ok: false,
                detail: Some(e.to_string()),
            },
        }
    }
}

impl std::fmt::Debug for ProviderSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProviderSet").field("mode", &self.mode()).finish()
    }
}
