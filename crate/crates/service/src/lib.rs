//! HTTP API over the analysis pipeline, versioned under `/api/v1`.
//!
//! - `POST /api/v1/analyze` runs the pipeline (or serves a cached example).
//! - `POST /api/v1/refilter` recomputes the structure view for a new node
//!   threshold from a cached result or an inline metagraph.
//! - `GET /api/v1/examples` and `GET /api/v1/health`.
//!
//! Everything else is served from the UI directory when one is configured.

use std::fs;
use std::num::NonZeroUsize;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::extract::rejection::JsonRejection;
use axum::extract::{DefaultBodyLimit, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use lru::LruCache;
use serde::{Deserialize, Serialize};
use serde_json::json;
use tokio::sync::Semaphore;
use tower_http::services::ServeDir;

use framefinder_core::config::AnalysisConfig;
use framefinder_core::corpus::{Corpus, INLINE_SOURCE};
use framefinder_core::metagraph::{GraphJson, MetaGraph, NodeStatistic};
use framefinder_core::providers::{FixtureStore, ProviderHealth, ProviderSet};
use framefinder_core::report::{
    rethreshold, run_analysis, serialize_result, structure_view, AnalysisError, AnalysisResult,
    RESULT_VERSION,
};

pub const DEFAULT_BODY_LIMIT: usize = 2 * 1024 * 1024;
pub const DEFAULT_CACHE_CAPACITY: usize = 64;

#[derive(Debug, Clone)]
pub struct ServiceOptions {
    /// Labels, axes and default thresholds for every request.
    pub analysis: AnalysisConfig,
    /// Results kept for refiltering by id.
    pub cache_capacity: usize,
    /// Analyses allowed to run at once; further requests get 503.
    pub max_concurrent: usize,
    /// Largest accepted request body in bytes.
    pub body_limit: usize,
    pub ui_dir: Option<PathBuf>,
}

impl Default for ServiceOptions {
    fn default() -> Self {
        ServiceOptions {
            analysis: AnalysisConfig::default(),
            cache_capacity: DEFAULT_CACHE_CAPACITY,
            max_concurrent: std::thread::available_parallelism().map_or(1, |n| n.get()),
            body_limit: DEFAULT_BODY_LIMIT,
            ui_dir: None,
        }
    }
}

/// A precomputed result served without provider calls.
#[derive(Debug, Clone)]
pub struct Example {
    pub id: String,
    pub title: String,
    pub result: AnalysisResult,
    pub meta: Option<MetaGraph>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ManifestEntry {
    id: String,
    title: String,
    /// Corpus file, relative to the manifest.
    input: PathBuf,
    #[serde(default = "yes")]
    split_lines: bool,
    /// Fixture directory, relative to the manifest.
    fixtures: PathBuf,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    examples: Vec<ManifestEntry>,
}

fn yes() -> bool {
    true
}

/// Computes every example listed in an `examples.json` manifest, each from
/// its own fixture directory.
pub fn load_examples(manifest: &Path, config: &AnalysisConfig) -> Result<Vec<Example>, String> {
    let text = fs::read_to_string(manifest).map_err(|e| format!("cannot read {}: {e}", manifest.display()))?;
    let parsed: Manifest = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", manifest.display()))?;
    let base = manifest.parent().unwrap_or(Path::new("."));
    let mut examples = Vec::new();
    for entry in parsed.examples {
        let fail = |e: String| format!("example {}: {e}", entry.id);
        let path = base.join(&entry.input);
        let corpus = if path.extension().is_some_and(|e| e == "jsonl") {
            Corpus::load_jsonl(&path)
        } else {
            Corpus::load_file(&path, entry.split_lines)
        }
        .map_err(|e| fail(e.to_string()))?;
        let store = FixtureStore::load(&base.join(&entry.fixtures)).map_err(|e| fail(e.to_string()))?;
        let (result, meta) =
            run_analysis(&corpus, &ProviderSet::fixtures(store), config).map_err(|e| fail(e.to_string()))?;
        examples.push(Example {
            id: entry.id,
            title: entry.title,
            result: result.without_timings(),
            meta,
        });
    }
    Ok(examples)
}

struct Cached {
    result: AnalysisResult,
    meta: Option<MetaGraph>,
}

struct Shared {
    providers: ProviderSet,
    options: ServiceOptions,
    /// In manifest order.
    examples: Vec<Arc<Example>>,
    results: Mutex<LruCache<String, Arc<Cached>>>,
    permits: Arc<Semaphore>,
}

#[derive(Clone)]
pub struct AppState(Arc<Shared>);

impl AppState {
    pub fn new(providers: ProviderSet, options: ServiceOptions, examples: Vec<Example>) -> Self {
        let capacity = NonZeroUsize::new(options.cache_capacity.max(1)).expect("nonzero");
        let permits = Arc::new(Semaphore::new(options.max_concurrent.max(1)));
        AppState(Arc::new(Shared {
            providers,
            examples: examples.into_iter().map(Arc::new).collect(),
            results: Mutex::new(LruCache::new(capacity)),
            permits,
            options,
        }))
    }

    fn remember(&self, result: &AnalysisResult, meta: Option<MetaGraph>) {
        let cached = Arc::new(Cached {
            result: result.without_timings(),
            meta,
        });
        self.0.results.lock().expect("cache lock").put(result.result_id.clone(), cached);
    }

    fn lookup(&self, result_id: &str) -> Option<Arc<Cached>> {
        if let Some(hit) = self.0.results.lock().expect("cache lock").get(result_id) {
            return Some(hit.clone());
        }
        self.0
            .examples
            .iter()
            .find(|e| e.result.result_id == result_id)
            .map(|e| {
                Arc::new(Cached {
                    result: e.result.clone(),
                    meta: e.meta.clone(),
                })
            })
    }
}

pub fn router(state: AppState) -> Router {
    let limit = state.0.options.body_limit;
    let ui = state.0.options.ui_dir.clone();
    let api = Router::new()
        .route("/api/v1/analyze", post(analyze))
        .route("/api/v1/refilter", post(refilter))
        .route("/api/v1/examples", get(examples))
        .route("/api/v1/health", get(health))
        .layer(DefaultBodyLimit::max(limit))
        .with_state(state);
    match ui {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: serde_json::Value,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            body: json!({ "error": message.into() }),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut response = (self.status, Json(self.body)).into_response();
        if self.status == StatusCode::SERVICE_UNAVAILABLE {
            response
                .headers_mut()
                .insert(header::RETRY_AFTER, header::HeaderValue::from_static("1"));
        }
        response
    }
}

impl From<JsonRejection> for ApiError {
    fn from(rejection: JsonRejection) -> Self {
        let status = match rejection.status() {
            StatusCode::PAYLOAD_TOO_LARGE => StatusCode::PAYLOAD_TOO_LARGE,
            StatusCode::UNSUPPORTED_MEDIA_TYPE => StatusCode::UNSUPPORTED_MEDIA_TYPE,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError::new(status, rejection.body_text())
    }
}

impl From<AnalysisError> for ApiError {
    fn from(e: AnalysisError) -> Self {
        match &e {
            AnalysisError::AllPerspectivesFailed {
                labels,
                axes,
                structure,
            } => ApiError {
                status: StatusCode::BAD_GATEWAY,
                body: json!({
                    "error": "all perspectives failed",
                    "perspectives": { "labels": labels, "axes": axes, "structure": structure },
                }),
            },
            AnalysisError::Config(_) | AnalysisError::MissingMetaGraph => ApiError::bad_request(e.to_string()),
            AnalysisError::WorkerPool(_) => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        }
    }
}

fn json_body(text: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], text).into_response()
}

/// Exactly one of `texts`, `raw` and `use_cached_example` must be set.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub texts: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw: Option<String>,
    #[serde(default = "yes")]
    pub split_lines: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_threshold: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub use_cached_example: Option<String>,
}

async fn analyze(
    State(state): State<AppState>,
    request: Result<Json<AnalyzeRequest>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(request) = request?;
    let sources = [
        request.texts.is_some(),
        request.raw.is_some(),
        request.use_cached_example.is_some(),
    ];
    if sources.iter().filter(|&&s| s).count() != 1 {
        return Err(ApiError::bad_request(
            "exactly one of texts, raw and use_cached_example is required",
        ));
    }
    let mut config = state.0.options.analysis.clone();
    if let Some(t) = request.threshold {
        config.threshold = t;
    }
    if let Some(t) = request.node_threshold {
        config.node_threshold = t;
    }
    config.validate().map_err(|e| ApiError::bad_request(e.to_string()))?;

    if let Some(id) = &request.use_cached_example {
        let example = state
            .0
            .examples
            .iter()
            .find(|e| &e.id == id)
            .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown example {id:?}")))?
            .clone();
        let result = rethreshold(&example.result, example.meta.as_ref(), config.threshold, config.node_threshold)?;
        state.remember(&result, example.meta.clone());
        return Ok(json_body(serialize_result(&result)));
    }

    let corpus = match (&request.texts, &request.raw) {
        (Some(texts), None) => Corpus::from_texts(
            INLINE_SOURCE,
            texts.iter().enumerate().map(|(i, t)| (format!("{INLINE_SOURCE}:{i}"), t)),
        ),
        (None, Some(raw)) => Corpus::split_into_documents(raw, request.split_lines),
        _ => unreachable!("source checked above"),
    }
    .map_err(|e| ApiError::bad_request(e.to_string()))?;

    let permit = state
        .0
        .permits
        .clone()
        .try_acquire_owned()
        .map_err(|_| ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "too many analyses in progress"))?;
    let providers = state.0.providers.clone();
    let (result, meta) = tokio::task::spawn_blocking(move || {
        let outcome = run_analysis(&corpus, &providers, &config);
        drop(permit);
        outcome
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    state.remember(&result, meta);
    Ok(json_body(serialize_result(&result)))
}

/// Exactly one of `result_id` and `structure` must be set. `structure` is a
/// full metagraph in graph-json form.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RefilterRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result_id: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure: Option<GraphJson>,
    pub node_threshold: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node_statistic: Option<NodeStatistic>,
}

async fn refilter(
    State(state): State<AppState>,
    request: Result<Json<RefilterRequest>, JsonRejection>,
) -> Result<Response, ApiError> {
    let Json(request) = request?;
    let (meta, statistic) = match (&request.result_id, request.structure) {
        (Some(id), None) => {
            let cached = state
                .lookup(id)
                .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, format!("unknown result id {id:?}")))?;
            let meta = cached.meta.clone().ok_or_else(|| {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "result has no structure perspective")
            })?;
            (meta, cached.result.config.analysis.node_statistic)
        }
        (None, Some(doc)) => (
            MetaGraph::from_graph_json(&doc).map_err(|e| ApiError::bad_request(e.to_string()))?,
            NodeStatistic::default(),
        ),
        _ => return Err(ApiError::bad_request("exactly one of result_id and structure is required")),
    };
    let statistic = request.node_statistic.unwrap_or(statistic);
    let threshold = request.node_threshold;
    let view = tokio::task::spawn_blocking(move || structure_view(&meta, threshold, statistic))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    let value = serde_json::to_value(&view).expect("view serializes");
    Ok(json_body(serde_json::to_string(&value).expect("value serializes")))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExampleSummary {
    pub id: String,
    pub title: String,
    pub n_documents: usize,
    pub result_id: String,
}

async fn examples(State(state): State<AppState>) -> Json<serde_json::Value> {
    let list: Vec<ExampleSummary> = state
        .0
        .examples
        .iter()
        .map(|e| ExampleSummary {
            id: e.id.clone(),
            title: e.title.clone(),
            n_documents: e.result.corpus.n_documents,
            result_id: e.result.result_id.clone(),
        })
        .collect();
    Json(json!({ "examples": list }))
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct HealthReport {
    /// "ok" or "degraded"; the service itself answers either way.
    pub status: String,
    pub summary: String,
    pub providers: ProviderHealth,
    pub examples: usize,
    pub result_version: u32,
}

async fn health(State(state): State<AppState>) -> Json<HealthReport> {
    let providers = state.0.providers.clone();
    let health = tokio::task::spawn_blocking(move || providers.health())
        .await
        .unwrap_or_else(|e| ProviderHealth {
            mode: "unknown".into(),
            ok: false,
            detail: Some(e.to_string()),
        });
    let status = if health.ok { "ok" } else { "degraded" };
    Json(HealthReport {
        status: status.into(),
        summary: format!("providers: {}, {status}", health.mode),
        providers: health,
        examples: state.0.examples.len(),
        result_version: RESULT_VERSION,
    })
}
