//! Frame-label perspective: per-document label probabilities aggregated into
//! corpus-level means with standard errors, and a threshold-based assignment.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::stats;

const DEFAULT_LABELS_JSON: &str = include_str!("../config/labels.json");

/// Label threshold applied when none is configured.
pub const DEFAULT_LABEL_THRESHOLD: f64 = 0.5;

#[derive(Debug, Error)]
pub enum LabelError {
    #[error("no documents to aggregate")]
    EmptyInput,
    #[error("document {document} has {found} probabilities, expected {expected}")]
    ShapeMismatch {
        document: usize,
        expected: usize,
        found: usize,
    },
    #[error("threshold {0} is outside (0, 1)")]
    InvalidThreshold(f64),
    #[error("invalid label set: {0}")]
    InvalidLabelSet(String),
    #[error("cannot read label set {path}: {reason}")]
    Load { path: String, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelDefinition {
    pub name: String,
    /// Hypothesis text handed to zero-shot backends.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

/// Ordered, uniquely named frame labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "LabelSetFile", into = "LabelSetFile")]
pub struct LabelSet {
    labels: Vec<LabelDefinition>,
}

#[derive(Serialize, Deserialize)]
struct LabelSetFile {
    labels: Vec<LabelDefinition>,
}

impl TryFrom<LabelSetFile> for LabelSet {
    type Error = LabelError;

    fn try_from(file: LabelSetFile) -> Result<Self, Self::Error> {
        LabelSet::new(file.labels)
    }
}

impl From<LabelSet> for LabelSetFile {
    fn from(set: LabelSet) -> Self {
        LabelSetFile { labels: set.labels }
    }
}

impl LabelSet {
    pub fn new(labels: Vec<LabelDefinition>) -> Result<Self, LabelError> {
        if labels.is_empty() {
            return Err(LabelError::InvalidLabelSet("no labels".into()));
        }
        let mut seen = HashSet::new();
        for label in &labels {
            if label.name.trim().is_empty() {
                return Err(LabelError::InvalidLabelSet("empty label name".into()));
            }
            if !seen.insert(label.name.as_str()) {
                return Err(LabelError::InvalidLabelSet(format!(
                    "duplicate label {:?}",
                    label.name
                )));
            }
        }
        Ok(LabelSet { labels })
    }

    /// Labels from bare names, without descriptions.
    pub fn from_names<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, LabelError> {
        Self::new(
            names
                .into_iter()
                .map(|name| LabelDefinition {
                    name: name.into(),
                    description: None,
                })
                .collect(),
        )
    }

    /// The fourteen media frames plus the catch-all "other" category.
    pub fn media_frames() -> Self {
        serde_json::from_str(DEFAULT_LABELS_JSON).expect("bundled label set is valid")
    }

    pub fn from_json(json: &str) -> Result<Self, LabelError> {
        serde_json::from_str(json).map_err(|e| LabelError::InvalidLabelSet(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, LabelError> {
        let json = std::fs::read_to_string(path).map_err(|e| LabelError::Load {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::from_json(&json).map_err(|e| LabelError::Load {
            path: path.display().to_string(),
            reason: e.to_string(),
        })
    }

    pub fn labels(&self) -> &[LabelDefinition] {
        &self.labels
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.labels.iter().map(|l| l.name.as_str())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

impl Default for LabelSet {
    fn default() -> Self {
        Self::media_frames()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelStat {
    pub label: String,
    pub mean: f64,
    pub stderr: f64,
    pub assigned: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelReport {
    pub threshold: f64,
    pub n_documents: usize,
    /// One entry per label, in label-set order.
    pub labels: Vec<LabelStat>,
}

/// Column-wise mean and standard error of `probs` (one row per document).
///
/// A label is assigned when its mean is strictly greater than `threshold`.
pub fn aggregate_labels(
    label_set: &LabelSet,
    probs: &[Vec<f64>],
    threshold: f64,
) -> Result<LabelReport, LabelError> {
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(LabelError::InvalidThreshold(threshold));
    }
    if probs.is_empty() {
        return Err(LabelError::EmptyInput);
    }
    let width = label_set.len();
    if let Some((document, row)) = probs.iter().enumerate().find(|(_, r)| r.len() != width) {
        return Err(LabelError::ShapeMismatch {
            document,
            expected: width,
            found: row.len(),
        });
    }

    let labels = label_set
        .labels()
        .iter()
        .enumerate()
        .map(|(j, def)| {
            let column: Vec<f64> = probs.iter().map(|row| row[j]).collect();
            let mean = stats::mean(&column).expect("non-empty column");
            let stderr = stats::standard_error(&column).expect("non-empty column");
            LabelStat {
                label: def.name.clone(),
                mean,
                stderr,
                assigned: mean > threshold,
            }
        })
        .collect();

    Ok(LabelReport {
        threshold,
        n_documents: probs.len(),
        labels,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BarClass {
    Assigned,
    Unassigned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelBar {
    pub label: String,
    pub value: f64,
    /// Half-width of the error bar.
    pub error: f64,
    pub class: BarClass,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabelChart {
    pub threshold: f64,
    pub bars: Vec<LabelBar>,
}

/// Bars sorted by descending mean; equal means keep label-set order.
pub fn label_bar_chart_data(report: &LabelReport) -> LabelChart {
    let mut bars: Vec<LabelBar> = report
        .labels
        .iter()
        .map(|s| LabelBar {
            label: s.label.clone(),
            value: s.mean,
            error: s.stderr,
            class: if s.assigned {
                BarClass::Assigned
            } else {
                BarClass::Unassigned
            },
        })
        .collect();
    bars.sort_by(|a, b| b.value.total_cmp(&a.value));
    LabelChart {
        threshold: report.threshold,
        bars,
    }
}
