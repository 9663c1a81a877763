//! Effective configuration of an analysis run.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::axes::AxisSet;
use crate::labels::{LabelSet, DEFAULT_LABEL_THRESHOLD};
use crate::metagraph::{EdgeWeighting, NodeStatistic, DEFAULT_NODE_THRESHOLD};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("invalid configuration: {0}")]
pub struct ConfigError(pub String);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub labels: LabelSet,
    pub axes: AxisSet,
    /// A label is assigned when its mean probability exceeds this.
    pub threshold: f64,
    /// Structure nodes need at least this much of `node_statistic`.
    pub node_threshold: u64,
    #[serde(default)]
    pub node_statistic: NodeStatistic,
    #[serde(default)]
    pub edge_weighting: EdgeWeighting,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            labels: LabelSet::media_frames(),
            axes: AxisSet::moral_foundations(),
            threshold: DEFAULT_LABEL_THRESHOLD,
            node_threshold: DEFAULT_NODE_THRESHOLD,
            node_statistic: NodeStatistic::default(),
            edge_weighting: EdgeWeighting::default(),
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(ConfigError(format!(
                "label threshold {} must lie strictly between 0 and 1",
                self.threshold
            )));
        }
        Ok(())
    }
}
