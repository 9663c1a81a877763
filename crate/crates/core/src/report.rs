//! Full analysis: the three perspectives over one corpus, assembled into a
//! versioned, byte-deterministic result document.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::amr::parse_penman;
use crate::axes::{
    average_embeddings, axis_plot_data, axis_report, build_axis, AxisPlot, AxisReport, Pole,
};
use crate::config::{AnalysisConfig, ConfigError};
use crate::corpus::{Corpus, SplitMode};
use crate::labels::{aggregate_labels, label_bar_chart_data, LabelChart, LabelReport};
use crate::metagraph::{superimpose, GraphJson, MetaGraph, MetaGraphStats, NodeStatistic};
use crate::providers::{validate, ProviderSet, TextItem};

pub const RESULT_VERSION: u32 = 1;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum AnalysisError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("all perspectives failed: labels: {labels}; axes: {axes}; structure: {structure}")]
    AllPerspectivesFailed {
        labels: String,
        axes: String,
        structure: String,
    },
    #[error("cannot start worker pool: {0}")]
    WorkerPool(String),
    #[error("the structure view cannot change without the full metagraph")]
    MissingMetaGraph,
}

/// Outcome of one perspective: its data, or why it could not be computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Perspective<T> {
    Ok { data: T },
    Error { error: String },
}

impl<T> Perspective<T> {
    fn from_result(r: Result<T, String>) -> Self {
        match r {
            Ok(data) => Perspective::Ok { data },
            Err(error) => Perspective::Error { error },
        }
    }

    pub fn data(&self) -> Option<&T> {
        match self {
            Perspective::Ok { data } => Some(data),
            Perspective::Error { .. } => None,
        }
    }

    pub fn error(&self) -> Option<&str> {
        match self {
            Perspective::Ok { .. } => None,
            Perspective::Error { error } => Some(error),
        }
    }

    pub fn is_ok(&self) -> bool {
        matches!(self, Perspective::Ok { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusMeta {
    pub source_name: String,
    pub n_documents: usize,
    pub split_mode: SplitMode,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelsView {
    pub report: LabelReport,
    pub chart: LabelChart,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxesView {
    pub reports: Vec<AxisReport>,
    pub plot: AxisPlot,
}

/// The filtered structure: nodes passing the threshold, reduced to their
/// largest weakly connected component.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureView {
    pub node_threshold: u64,
    pub node_statistic: NodeStatistic,
    /// Nodes passing the threshold, before component extraction.
    pub n_filtered_nodes: usize,
    pub component: MetaGraphStats,
    pub graph: GraphJson,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureData {
    pub metagraph: MetaGraphStats,
    /// Source graphs containing a directed cycle.
    pub n_cyclic_graphs: usize,
    pub view: StructureView,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub provider_mode: String,
    #[serde(flatten)]
    pub analysis: AnalysisConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisResult {
    pub version: u32,
    /// Hash of the result content, timings excluded.
    pub result_id: String,
    pub corpus: CorpusMeta,
    pub labels: Perspective<LabelsView>,
    pub axes: Perspective<AxesView>,
    pub structure: Perspective<StructureData>,
    pub config: ConfigEcho,
    /// Wall-clock milliseconds per stage.
    pub timings: BTreeMap<String, f64>,
}

impl AnalysisResult {
    /// A copy with timings cleared, for comparing runs.
    pub fn without_timings(&self) -> AnalysisResult {
        AnalysisResult {
            timings: BTreeMap::new(),
            ..self.clone()
        }
    }

    fn content_id(&self) -> String {
        let mut bare = self.without_timings();
        bare.result_id = String::new();
        let digest = Sha256::digest(serialize_result(&bare).as_bytes());
        digest[..16].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Versioned JSON with object keys sorted, ending in a newline.
pub fn serialize_result(result: &AnalysisResult) -> String {
    let value = serde_json::to_value(result).expect("result serializes");
    let mut s = serde_json::to_string_pretty(&value).expect("value serializes");
    s.push('\n');
    s
}

pub fn parse_result(text: &str) -> Result<AnalysisResult, serde_json::Error> {
    serde_json::from_str(text)
}

/// Filters `meta` by `statistic` ≥ `node_threshold` and keeps the largest
/// weakly connected component of what remains.
pub fn structure_view(meta: &MetaGraph, node_threshold: u64, node_statistic: NodeStatistic) -> StructureView {
    let filtered = meta.filter_by(node_statistic, node_threshold);
    let component = filtered.largest_weakly_connected_component().unwrap_or(filtered.clone());
    StructureView {
        node_threshold,
        node_statistic,
        n_filtered_nodes: filtered.node_count(),
        component: component.stats(),
        graph: component.to_graph_json(),
    }
}

/// Re-derives `result` for other thresholds without consulting providers.
///
/// Label assignments follow from the stored means. A new structure view
/// needs `meta`, the full metagraph of the original run.
pub fn rethreshold(
    result: &AnalysisResult,
    meta: Option<&MetaGraph>,
    threshold: f64,
    node_threshold: u64,
) -> Result<AnalysisResult, AnalysisError> {
    let mut config = result.config.clone();
    config.analysis.threshold = threshold;
    config.analysis.node_threshold = node_threshold;
    config.analysis.validate()?;

    let mut out = result.without_timings();
    if let Perspective::Ok { data } = &mut out.labels {
        data.report.threshold = threshold;
        for stat in &mut data.report.labels {
            stat.assigned = stat.mean > threshold;
        }
        data.chart = label_bar_chart_data(&data.report);
    }
    if let Perspective::Ok { data } = &mut out.structure {
        match meta {
            Some(meta) => data.view = structure_view(meta, node_threshold, config.analysis.node_statistic),
            None if data.view.node_threshold != node_threshold => return Err(AnalysisError::MissingMetaGraph),
            None => {}
        }
    }
    out.config = config;
    out.result_id = out.content_id();
    Ok(out)
}

fn label_perspective(
    items: &[TextItem<'_>],
    providers: &ProviderSet,
    config: &AnalysisConfig,
) -> Result<LabelsView, String> {
    let probs = providers
        .labels
        .label_probabilities(items, &config.labels)
        .map_err(|e| e.to_string())?;
    validate::alignment(items.len(), probs.len())?;
    for (item, row) in items.iter().zip(&probs) {
        validate::probabilities(row, config.labels.len()).map_err(|r| format!("document {}: {r}", item.id))?;
    }
    let report = aggregate_labels(&config.labels, &probs, config.threshold).map_err(|e| e.to_string())?;
    let chart = label_bar_chart_data(&report);
    Ok(LabelsView { report, chart })
}

fn axes_perspective(
    items: &[TextItem<'_>],
    providers: &ProviderSet,
    config: &AnalysisConfig,
) -> Result<AxesView, String> {
    let definitions = config.axes.axes();
    let pole_ids: Vec<[Vec<String>; 2]> = definitions
        .iter()
        .map(|d| [d.pole_ids(Pole::Vice), d.pole_ids(Pole::Virtue)])
        .collect();
    let mut requests: Vec<TextItem<'_>> = items.to_vec();
    for (d, ids) in definitions.iter().zip(&pole_ids) {
        for (pole, pole_ids) in [Pole::Vice, Pole::Virtue].into_iter().zip(ids) {
            for (id, text) in pole_ids.iter().zip(d.pole(pole).texts()) {
                requests.push(TextItem { id, text });
            }
        }
    }
    let embeddings = providers
        .embeddings
        .embeddings(&requests)
        .map_err(|e| e.to_string())?;
    validate::alignment(requests.len(), embeddings.len())?;
    validate::embeddings(&embeddings, None)?;

    let (doc_embeddings, mut pole_embeddings) = embeddings.split_at(items.len());
    let documents: Vec<(&str, &[f64])> = items
        .iter()
        .zip(doc_embeddings)
        .map(|(i, e)| (i.id, e.as_slice()))
        .collect();

    let mut poles = Vec::with_capacity(definitions.len());
    for ids in &pole_ids {
        let (vice, rest) = pole_embeddings.split_at(ids[0].len());
        let (virtue, rest) = rest.split_at(ids[1].len());
        pole_embeddings = rest;
        poles.push((vice, virtue));
    }

    let reports = definitions
        .par_iter()
        .zip(poles)
        .map(|(d, (vice, virtue))| {
            let vice = average_embeddings(vice).map_err(|e| format!("axis {}: {e}", d.name))?;
            let virtue = average_embeddings(virtue).map_err(|e| format!("axis {}: {e}", d.name))?;
            let axis = build_axis(&vice, &virtue, &d.name).map_err(|e| e.to_string())?;
            axis_report(&axis, &documents).map_err(|e| format!("axis {}: {e}", d.name))
        })
        .collect::<Result<Vec<_>, String>>()?;
    let plot = axis_plot_data(&config.axes, &reports);
    Ok(AxesView { reports, plot })
}

fn structure_perspective(
    items: &[TextItem<'_>],
    providers: &ProviderSet,
    config: &AnalysisConfig,
) -> Result<(StructureData, MetaGraph), String> {
    let parses = providers.amr.parses(items).map_err(|e| e.to_string())?;
    validate::alignment(items.len(), parses.len())?;
    let graphs = items
        .par_iter()
        .zip(&parses)
        .map(|(item, text)| {
            parse_penman(text)
                .map(|g| g.with_doc_id(item.id))
                .map_err(|e| format!("document {}: {e}", item.id))
        })
        .collect::<Result<Vec<_>, String>>()?;
    let meta = superimpose(&graphs, config.edge_weighting).map_err(|e| e.to_string())?;
    let data = StructureData {
        metagraph: meta.stats(),
        n_cyclic_graphs: graphs.iter().filter(|g| g.is_cyclic()).count(),
        view: structure_view(&meta, config.node_threshold, config.node_statistic),
    };
    Ok((data, meta))
}

fn millis(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Runs all three perspectives concurrently. A perspective whose provider
/// fails is reported as an error entry; the run fails only if all three do.
///
/// Also returns the full metagraph when the structure perspective succeeded,
/// so that it can be re-filtered without recomputing.
pub fn run_analysis(
    corpus: &Corpus,
    providers: &ProviderSet,
    config: &AnalysisConfig,
) -> Result<(AnalysisResult, Option<MetaGraph>), AnalysisError> {
    config.validate()?;
    let start = Instant::now();
    let items: Vec<TextItem<'_>> = corpus.documents().iter().map(TextItem::from).collect();

    let ((labels, labels_ms), ((axes, axes_ms), (structure, structure_ms))) = rayon::join(
        || {
            let t = Instant::now();
            (label_perspective(&items, providers, config), millis(t))
        },
        || {
            rayon::join(
                || {
                    let t = Instant::now();
                    (axes_perspective(&items, providers, config), millis(t))
                },
                || {
                    let t = Instant::now();
                    (structure_perspective(&items, providers, config), millis(t))
                },
            )
        },
    );

    if let (Err(l), Err(a), Err(s)) = (&labels, &axes, &structure) {
        return Err(AnalysisError::AllPerspectivesFailed {
            labels: l.clone(),
            axes: a.clone(),
            structure: s.clone(),
        });
    }

    let (structure, meta) = match structure {
        Ok((data, meta)) => (Ok(data), Some(meta)),
        Err(e) => (Err(e), None),
    };
    let mut result = AnalysisResult {
        version: RESULT_VERSION,
        result_id: String::new(),
        corpus: CorpusMeta {
            source_name: corpus.source_name.clone(),
            n_documents: corpus.len(),
            split_mode: corpus.split_mode,
        },
        labels: Perspective::from_result(labels),
        axes: Perspective::from_result(axes),
        structure: Perspective::from_result(structure),
        config: ConfigEcho {
            provider_mode: providers.mode().to_string(),
            analysis: config.clone(),
        },
        timings: BTreeMap::from([
            ("labels".to_string(), labels_ms),
            ("axes".to_string(), axes_ms),
            ("structure".to_string(), structure_ms),
        ]),
    };
    result.result_id = result.content_id();
    result.timings.insert("total".to_string(), millis(start));
    Ok((result, meta))
}

/// Like [`run_analysis`], inside a dedicated pool of `jobs` worker threads.
pub fn run_analysis_with_jobs(
    corpus: &Corpus,
    providers: &ProviderSet,
    config: &AnalysisConfig,
    jobs: usize,
) -> Result<(AnalysisResult, Option<MetaGraph>), AnalysisError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| AnalysisError::WorkerPool(e.to_string()))?;
    pool.install(|| run_analysis(corpus, providers, config))
}

pub fn analyze(
    corpus: &Corpus,
    providers: &ProviderSet,
    config: &AnalysisConfig,
) -> Result<AnalysisResult, AnalysisError> {
    run_analysis(corpus, providers, config).map(|(result, _)| result)
}
