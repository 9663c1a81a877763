//! Frame-dimension perspective: documents are scored against antagonistic
//! pole axes in embedding space, and the scores are reduced to a bias
//! (mean) and an intensity (population variance) per axis.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stats;

const DEFAULT_AXES_JSON: &str = include_str!("../config/axes.json");

pub const MIN_MARKER_SIZE: f64 = 6.0;
pub const MAX_MARKER_SIZE: f64 = 36.0;

#[derive(Debug, Error, PartialEq)]
pub enum AxisError {
    #[error("axis {0:?}: pole embeddings coincide, axis has zero length")]
    DegenerateAxis(String),
    #[error("embedding has zero norm")]
    ZeroEmbedding,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("embedding contains a non-finite value")]
    NonFinite,
    #[error("no scores to aggregate")]
    EmptyInput,
    #[error("invalid axis set: {0}")]
    InvalidAxisSet(String),
    #[error("cannot read axis set {path}: {reason}")]
    Load { path: String, reason: String },
}

/// Definition of one pole: a single description text (embedded verbatim),
/// or a keyword list whose embeddings are averaged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PoleDefinition {
    Text(String),
    Keywords(Vec<String>),
}

impl PoleDefinition {
    pub fn texts(&self) -> Vec<&str> {
        match self {
            PoleDefinition::Text(t) => vec![t.as_str()],
            PoleDefinition::Keywords(ks) => ks.iter().map(String::as_str).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pole {
    Vice,
    Virtue,
}

impl Pole {
    fn as_str(self) -> &'static str {
        match self {
            Pole::Vice => "vice",
            Pole::Virtue => "virtue",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AxisDefinition {
    /// Conventionally "vice/virtue", e.g. "harm/care".
    pub name: String,
    pub vice: PoleDefinition,
    pub virtue: PoleDefinition,
}

impl AxisDefinition {
    pub fn pole(&self, pole: Pole) -> &PoleDefinition {
        match pole {
            Pole::Vice => &self.vice,
            Pole::Virtue => &self.virtue,
        }
    }

    /// Fixture keys of the texts that make up `pole`.
    ///
    /// A single-text pole is `pole:<axis>:<vice|virtue>`; keyword poles append
    /// the keyword index.
    pub fn pole_ids(&self, pole: Pole) -> Vec<String> {
        match self.pole(pole) {
            PoleDefinition::Text(_) => vec![format!("pole:{}:{}", self.name, pole.as_str())],
            PoleDefinition::Keywords(ks) => (0..ks.len())
                .map(|i| format!("pole:{}:{}:{i}", self.name, pole.as_str()))
                .collect(),
        }
    }

    /// Plot labels for the (left, right) ends of the axis.
    pub fn pole_labels(&self) -> (String, String) {
        match self.name.split_once('/') {
            Some((vice, virtue)) => (vice.trim().to_string(), virtue.trim().to_string()),
            None => ("vice".to_string(), "virtue".to_string()),
        }
    }

    /// The same axis with its poles exchanged.
    pub fn swapped(&self) -> AxisDefinition {
        let (vice, virtue) = self.pole_labels();
        AxisDefinition {
            name: format!("{virtue}/{vice}"),
            vice: self.virtue.clone(),
            virtue: self.vice.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "AxisSetFile", into = "AxisSetFile")]
pub struct AxisSet {
    axes: Vec<AxisDefinition>,
}

#[derive(Serialize, Deserialize)]
struct AxisSetFile {
    axes: Vec<AxisDefinition>,
}

impl TryFrom<AxisSetFile> for AxisSet {
    type Error = AxisError;

    fn try_from(file: AxisSetFile) -> Result<Self, Self::Error> {
        AxisSet::new(file.axes)
    }
}

impl From<AxisSet> for AxisSetFile {
    fn from(set: AxisSet) -> Self {
        AxisSetFile { axes: set.axes }
    }
}

impl AxisSet {
    pub fn new(axes: Vec<AxisDefinition>) -> Result<Self, AxisError> {
        if axes.is_empty() {
            return Err(AxisError::InvalidAxisSet("no axes".into()));
        }
        let mut seen = HashSet::new();
        for axis in &axes {
            if axis.name.trim().is_empty() {
                return Err(AxisError::InvalidAxisSet("empty axis name".into()));
            }
            if !seen.insert(axis.name.as_str()) {
                return Err(AxisError::InvalidAxisSet(format!(
                    "duplicate axis {:?}",
                    axis.name
                )));
            }
            for pole in [&axis.vice, &axis.virtue] {
                let texts = pole.texts();
                if texts.is_empty() || texts.iter().any(|t| t.trim().is_empty()) {
                    return Err(AxisError::InvalidAxisSet(format!(
                        "axis {:?} has an empty pole definition",
                        axis.name
                    )));
                }
            }
        }
        Ok(AxisSet { axes })
    }

    /// The five moral-foundation axes, vice pole first.
    pub fn moral_foundations() -> Self {
        serde_json::from_str(DEFAULT_AXES_JSON).expect("bundled axis set is valid")
    }

    pub fn from_json(json: &str) -> Result<Self, AxisError> {
        serde_json::from_str(json).map_err(|e| AxisError::InvalidAxisSet(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, AxisError> {
        let json = std::fs::read_to_string(path).map_err(|e| AxisError::Load {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::from_json(&json).map_err(|e| AxisError::Load {
            path: path.display().to_string(),
            reason: e.to_string(),
        })
    }

    pub fn axes(&self) -> &[AxisDefinition] {
        &self.axes
    }

    pub fn len(&self) -> usize {
        self.axes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.axes.is_empty()
    }
}

impl Default for AxisSet {
    fn default() -> Self {
        Self::moral_foundations()
    }
}

/// A direction in embedding space pointing from the vice pole to the virtue pole.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameAxis {
    pub name: String,
    vector: Vec<f64>,
    norm: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

fn check_finite(v: &[f64]) -> Result<(), AxisError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(AxisError::NonFinite)
    }
}

/// Builds the axis `virtue - vice`. Positive document scores lean towards
/// the virtue pole.
pub fn build_axis(
    vice_embedding: &[f64],
    virtue_embedding: &[f64],
    name: &str,
) -> Result<FrameAxis, AxisError> {
    if vice_embedding.len() != virtue_embedding.len() {
        return Err(AxisError::DimensionMismatch {
            expected: vice_embedding.len(),
            found: virtue_embedding.len(),
        });
    }
    check_finite(vice_embedding)?;
    check_finite(virtue_embedding)?;
    if norm(vice_embedding) == 0.0 || norm(virtue_embedding) == 0.0 {
        return Err(AxisError::ZeroEmbedding);
    }
    let vector: Vec<f64> = virtue_embedding
        .iter()
        .zip(vice_embedding)
        .map(|(v, w)| v - w)
        .collect();
    let n = norm(&vector);
    if n == 0.0 || !n.is_finite() {
        return Err(AxisError::DegenerateAxis(name.to_string()));
    }
    Ok(FrameAxis {
        name: name.to_string(),
        vector,
        norm: n,
    })
}

/// Element-wise mean of keyword embeddings, used for keyword-list poles.
pub fn average_embeddings(embeddings: &[Vec<f64>]) -> Result<Vec<f64>, AxisError> {
    let first = embeddings.first().ok_or(AxisError::EmptyInput)?;
    let dim = first.len();
    if let Some(bad) = embeddings.iter().find(|e| e.len() != dim) {
        return Err(AxisError::DimensionMismatch {
            expected: dim,
            found: bad.len(),
        });
    }
    Ok((0..dim)
        .map(|k| {
            let column: Vec<f64> = embeddings.iter().map(|e| e[k]).collect();
            stats::stable_sum(&column) / embeddings.len() as f64
        })
        .collect())
}

impl FrameAxis {
    pub fn vector(&self) -> &[f64] {
        &self.vector
    }

    pub fn dimension(&self) -> usize {
        self.vector.len()
    }

    /// Cosine similarity between the axis and a document embedding, in [-1, 1].
    pub fn score(&self, doc_embedding: &[f64]) -> Result<f64, AxisError> {
        score_document(self, doc_embedding)
    }
}

pub fn score_document(axis: &FrameAxis, doc_embedding: &[f64]) -> Result<f64, AxisError> {
    if doc_embedding.len() != axis.vector.len() {
        return Err(AxisError::DimensionMismatch {
            expected: axis.vector.len(),
            found: doc_embedding.len(),
        });
    }
    check_finite(doc_embedding)?;
    let doc_norm = norm(doc_embedding);
    if doc_norm == 0.0 {
        return Err(AxisError::ZeroEmbedding);
    }
    let cos = dot(&axis.vector, doc_embedding) / (axis.norm * doc_norm);
    Ok(cos.clamp(-1.0, 1.0))
}

/// Returns `(bias, intensity)`: the mean and population variance of `scores`.
pub fn aggregate_axis(scores: &[f64]) -> Result<(f64, f64), AxisError> {
    let bias = stats::mean(scores).ok_or(AxisError::EmptyInput)?;
    let intensity = stats::population_variance(scores).ok_or(AxisError::EmptyInput)?;
    Ok((bias, intensity))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentScore {
    pub doc_id: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisReport {
    pub name: String,
    pub bias: f64,
    pub intensity: f64,
    /// Per-document scores ordered by document id.
    pub scores: Vec<DocumentScore>,
}

/// Scores every document against `axis` and aggregates the results.
///
/// `documents` pairs a document id with its embedding.
pub fn axis_report(
    axis: &FrameAxis,
    documents: &[(&str, &[f64])],
) -> Result<AxisReport, AxisError> {
    let mut scores = documents
        .iter()
        .map(|(id, emb)| {
            Ok(DocumentScore {
                doc_id: id.to_string(),
                score: score_document(axis, emb)?,
            })
        })
        .collect::<Result<Vec<_>, AxisError>>()?;
    scores.sort_by(|a, b| a.doc_id.cmp(&b.doc_id));
    let values: Vec<f64> = scores.iter().map(|s| s.score).collect();
    let (bias, intensity) = aggregate_axis(&values)?;
    Ok(AxisReport {
        name: axis.name.clone(),
        bias,
        intensity,
        scores,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisLine {
    pub name: String,
    /// Vice pole, drawn at x = -1.
    pub left_label: String,
    /// Virtue pole, drawn at x = +1.
    pub right_label: String,
    pub x_min: f64,
    pub x_max: f64,
    pub bias: f64,
    pub intensity: f64,
    pub marker_size: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisPlot {
    pub lines: Vec<AxisLine>,
}

/// Marker size for an intensity. Monotone, and absolute so that sizes are
/// comparable across axes and runs. Variance of scores in [-1, 1] is at most 1.
pub fn marker_size(intensity: f64) -> f64 {
    let t = intensity.clamp(0.0, 1.0).sqrt();
    MIN_MARKER_SIZE + (MAX_MARKER_SIZE - MIN_MARKER_SIZE) * t
}

/// One horizontal line per axis in `reports`, matched to its definition by name.
pub fn axis_plot_data(definitions: &AxisSet, reports: &[AxisReport]) -> AxisPlot {
    let lines = reports
        .iter()
        .map(|r| {
            let (left_label, right_label) = definitions
                .axes()
                .iter()
                .find(|d| d.name == r.name)
                .map(AxisDefinition::pole_labels)
                .unwrap_or_else(|| ("vice".into(), "virtue".into()));
            AxisLine {
                name: r.name.clone(),
                left_label,
                right_label,
                x_min: -1.0,
                x_max: 1.0,
                bias: r.bias,
                intensity: r.intensity,
                marker_size: marker_size(r.intensity),
            }
        })
        .collect();
    AxisPlot { lines }
}
