//! Client for a remote inference service.
//!
//! Requests are `POST <endpoint>/<kind>` with body
//! `{"version": 1, "texts": [...], "config": {...}}`, where kind is one of
//! `labels`, `embeddings` or `amr`. A successful response is
//! `{"version": 1, "outputs": [...]}` with one output per text. Failures are
//! reported either by a non-success status or by `{"error": "..."}`.

use std::sync::Mutex;
use std::time::Duration;

use rayon::prelude::*;
use reqwest::blocking::Client;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{
    validate, AmrParseProvider, EmbeddingProvider, FixtureKind, LabelProbabilityProvider,
    ProviderError, ProviderStatus, TextItem,
};
use crate::labels::LabelSet;

pub const WIRE_VERSION: u32 = 1;
pub const DEFAULT_BATCH_SIZE: usize = 16;
const DEFAULT_TIMEOUT: Duration = Duration::from_secs(120);

#[derive(Serialize)]
struct WireRequest<'a> {
    version: u32,
    texts: &'a [&'a str],
    config: &'a Value,
}

#[derive(Deserialize)]
struct WireResponse<T> {
    version: u32,
    #[serde(default = "Option::default")]
    outputs: Option<Vec<T>>,
    #[serde(default)]
    error: Option<String>,
}

#[derive(Deserialize)]
struct WireError {
    error: String,
}

#[derive(Debug)]
pub struct HttpProvider {
    endpoint: String,
    client: Client,
    batch_size: usize,
    dimension: Mutex<Option<usize>>,
}

fn build_client(timeout: Duration) -> Result<Client, ProviderError> {
    Client::builder()
        .timeout(timeout)
        .build()
        .map_err(|e| ProviderError::Transport(e.to_string()))
}

impl HttpProvider {
    pub fn new(endpoint: &str) -> Result<Self, ProviderError> {
        let endpoint = endpoint.trim().trim_end_matches('/');
        let valid = endpoint
            .strip_prefix("http://")
            .or_else(|| endpoint.strip_prefix("https://"))
            .is_some_and(|host| !host.is_empty());
        if !valid {
            return Err(ProviderError::Transport(format!(
                "endpoint {endpoint:?} is not an http(s) URL"
            )));
        }
        Ok(HttpProvider {
            endpoint: endpoint.to_string(),
            client: build_client(DEFAULT_TIMEOUT)?,
            batch_size: DEFAULT_BATCH_SIZE,
            dimension: Mutex::new(None),
        })
    }

    /// Number of texts per request; at least 1.
    pub fn with_batch_size(mut self, batch_size: usize) -> Self {
        self.batch_size = batch_size.max(1);
        self
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Result<Self, ProviderError> {
        self.client = build_client(timeout)?;
        Ok(self)
    }

    pub fn endpoint(&self) -> &str {
        &self.endpoint
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    fn request<T: DeserializeOwned>(
        &self,
        kind: FixtureKind,
        texts: &[&str],
        config: &Value,
    ) -> Result<Vec<T>, ProviderError> {
        let url = format!("{}/{}", self.endpoint, kind.as_str());
        let body = WireRequest {
            version: WIRE_VERSION,
            texts,
            config,
        };
        let response = self
            .client
            .post(&url)
            .json(&body)
            .send()
            .map_err(|e| ProviderError::Transport(format!("{url}: {e}")))?;
        let status = response.status();
        let text = response
            .text()
            .map_err(|e| ProviderError::Transport(format!("{url}: {e}")))?;
        if !status.is_success() {
            let detail = serde_json::from_str::<WireError>(&text)
                .map(|e| e.error)
                .unwrap_or(text);
            return Err(ProviderError::Remote(format!("{url}: HTTP {status}: {detail}")));
        }
        let parsed: WireResponse<T> = serde_json::from_str(&text)
            .map_err(|e| ProviderError::Protocol(format!("{url}: {e}")))?;
        if let Some(error) = parsed.error {
            return Err(ProviderError::Remote(format!("{url}: {error}")));
        }
        if parsed.version != WIRE_VERSION {
            return Err(ProviderError::Protocol(format!(
                "{url}: unsupported version {}",
                parsed.version
            )));
        }
        let outputs = parsed
            .outputs
            .ok_or_else(|| ProviderError::Protocol(format!("{url}: response has no outputs")))?;
        validate::alignment(texts.len(), outputs.len())
            .map_err(|r| ProviderError::Protocol(format!("{url}: {r}")))?;
        Ok(outputs)
    }

    /// Sends `items` in batches, concurrently, and reassembles the outputs
    /// in input order. No request is made for an empty list.
    fn call<T: DeserializeOwned + Send>(
        &self,
        kind: FixtureKind,
        items: &[TextItem<'_>],
        config: &Value,
    ) -> Result<Vec<T>, ProviderError> {
        let texts: Vec<&str> = items.iter().map(|i| i.text).collect();
        let batches: Vec<Vec<T>> = texts
            .par_chunks(self.batch_size)
            .map(|chunk| self.request(kind, chunk, config))
            .collect::<Result<_, _>>()?;
        Ok(batches.into_iter().flatten().collect())
    }
}

impl LabelProbabilityProvider for HttpProvider {
    fn label_probabilities(
        &self,
        items: &[TextItem<'_>],
        labels: &LabelSet,
    ) -> Result<Vec<Vec<f64>>, ProviderError> {
        let config = serde_json::to_value(labels).expect("label set serializes");
        let rows: Vec<Vec<f64>> = self.call(FixtureKind::Labels, items, &config)?;
        for (i, row) in rows.iter().enumerate() {
            validate::probabilities(row, labels.len())
                .map_err(|r| ProviderError::Protocol(format!("output {i}: {r}")))?;
        }
        Ok(rows)
    }
}

impl EmbeddingProvider for HttpProvider {
    fn embeddings(&self, items: &[TextItem<'_>]) -> Result<Vec<Vec<f64>>, ProviderError> {
        let vectors: Vec<Vec<f64>> = self.call(FixtureKind::Embeddings, items, &Value::Object(Default::default()))?;
        let mut dimension = self.dimension.lock().expect("dimension lock");
        validate::embeddings(&vectors, *dimension).map_err(ProviderError::Protocol)?;
        if let Some(first) = vectors.first() {
            *dimension = Some(first.len());
        }
        Ok(vectors)
    }
}

impl AmrParseProvider for HttpProvider {
    fn parses(&self, items: &[TextItem<'_>]) -> Result<Vec<String>, ProviderError> {
        let parses: Vec<String> = self.call(FixtureKind::Amr, items, &Value::Object(Default::default()))?;
        for (i, p) in parses.iter().enumerate() {
            validate::parse(p).map_err(|r| ProviderError::Protocol(format!("output {i}: {r}")))?;
        }
        Ok(parses)
    }
}

impl ProviderStatus for HttpProvider {
    fn mode(&self) -> &'static str {
        "http"
    }

    fn probe(&self) -> Result<(), ProviderError> {
        let url = format!("{}/health", self.endpoint);
        let response = self
            .client
            .get(&url)
            .timeout(Duration::from_secs(5))
            .send()
            .map_err(|e| ProviderError::Transport(format!("{url}: {e}")))?;
        if response.status().is_success() {
            Ok(())
        } else {
            Err(ProviderError::Remote(format!("{url}: HTTP {}", response.status())))
        }
    }
}
