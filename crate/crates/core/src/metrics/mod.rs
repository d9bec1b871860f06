//! Accuracy over seen/unseen classes, harmonic mean, and detection delay.

mod accuracy;
mod icdd;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use accuracy::{harmonic_mean, AccuracyState, ClassTally, PredictionRecord};
pub use icdd::{auc_step, build_curves, icdd, Curves, DetectionTimeline};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionEntry {
    pub class: String,
    pub class_id: u32,
    pub introduced_at: usize,
    pub detected_at: usize,
}

/// Final metrics of one stream run. Accuracies are percentages; `icdd` is
/// a fraction and `icdd_pct` the same value times 100.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub acc_seen: Option<f64>,
    pub acc_unseen: Option<f64>,
    pub hm: Option<f64>,
    pub icdd: f64,
    pub icdd_pct: f64,
    /// Set when the stream held no unseen class, making `icdd` vacuous.
    pub icdd_no_unseen: bool,
    pub stream_length: usize,
    pub unseen_classes: usize,
    pub queries_granted: u64,
    pub queries_used: u64,
    /// Queries that landed on samples of initially unseen classes.
    pub queries_on_unseen: u64,
    pub detections: Vec<DetectionEntry>,
    pub per_class_accuracy: BTreeMap<String, f64>,
    pub config_echo: serde_json::Value,
}

impl RunReport {
    /// Share of spent queries that went to unseen-class samples.
    pub fn unseen_query_fraction(&self) -> Option<f64> {
        (self.queries_used > 0).then(|| self.queries_on_unseen as f64 / self.queries_used as f64)
    }
}
