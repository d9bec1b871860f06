//! Training-free key-value cache adapter (positive cache only).
//!
//! Confident predictions are stored per pseudo-label as `(feature,
//! entropy)` pairs, keeping the lowest-entropy `shot_capacity` entries.
//! At prediction time every cached entry of class `c` adds
//! `residual_weight · exp(-sharpness · (1 - cos))` to class `c`'s logit.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Prediction, TtaEngine};
use crate::dataset::EmbeddingSample;
use crate::embedding::{self, softmax_scaled, FeatureVector, Probabilities};
use crate::error::{IttaError, Result};
use crate::registry::{ClassId, ClassRegistry};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TdaConfig {
    pub shot_capacity: usize,
    pub residual_weight: f64,
    pub sharpness: f64,
    /// Inclusive `[lo, hi]` gate on normalized prediction entropy.
    pub entropy_gate: [f64; 2],
}

impl Default for TdaConfig {
    fn default() -> Self {
        TdaConfig {
            shot_capacity: 3,
            residual_weight: 2.0,
            sharpness: 5.0,
            entropy_gate: [0.0, 1.0],
        }
    }
}

impl TdaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.shot_capacity == 0 {
            return Err(IttaError::config("tda shot_capacity must be at least 1"));
        }
        if !(self.residual_weight >= 0.0 && self.residual_weight.is_finite()) {
            return Err(IttaError::config("tda residual_weight must be finite and >= 0"));
        }
        if !(self.sharpness > 0.0 && self.sharpness.is_finite()) {
            return Err(IttaError::config("tda sharpness must be positive"));
        }
        let [lo, hi] = self.entropy_gate;
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(IttaError::config("tda entropy_gate must satisfy lo <= hi"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TdaCacheEntry {
    pub feature: FeatureVector,
    pub entropy: f64,
}

#[derive(Debug, Clone)]
pub struct TdaCache {
    config: TdaConfig,
    lists: BTreeMap<ClassId, Vec<TdaCacheEntry>>,
}

impl TdaCache {
    pub fn new(config: TdaConfig, class_ids: impl IntoIterator<Item = ClassId>) -> Result<Self> {
        config.validate()?;
        Ok(TdaCache {
            config,
            lists: class_ids.into_iter().map(|c| (c, Vec::new())).collect(),
        })
    }

    pub fn config(&self) -> &TdaConfig {
        &self.config
    }

    /// Cached entries of `class_id`, ascending by entropy.
    pub fn entries(&self, class_id: ClassId) -> &[TdaCacheEntry] {
        self.lists.get(&class_id).map_or(&[], Vec::as_slice)
    }

    pub fn is_keyed(&self, class_id: ClassId) -> bool {
        self.lists.contains_key(&class_id)
    }

    pub fn total_entries(&self) -> usize {
        self.lists.values().map(Vec::len).sum()
    }

    /// Offers `feature` under `predicted` with the entropy of `probs`.
    /// Returns whether the cache changed.
    pub fn observe(&mut self, feature: &FeatureVector, predicted: ClassId, probs: &Probabilities) -> bool {
        self.insert(feature, predicted, probs.normalized_entropy())
    }

    /// Inserts a pre-computed entropy. Exposed for replay tests.
    pub fn insert(&mut self, feature: &FeatureVector, class_id: ClassId, entropy: f64) -> bool {
        let [lo, hi] = self.config.entropy_gate;
        if !(entropy >= lo && entropy <= hi) {
            return false;
        }
        let cap = self.config.shot_capacity;
        let list = self.lists.entry(class_id).or_default();
        if list.len() >= cap {
            match list.last() {
                Some(worst) if entropy < worst.entropy => {
                    list.pop();
                }
                _ => return false,
            }
        }
        // after any existing entries of equal entropy
        let at = list.partition_point(|e| e.entropy <= entropy);
        list.insert(
            at,
            TdaCacheEntry {
                feature: feature.clone(),
                entropy,
            },
        );
        true
    }

    pub fn on_registry_expanded(&mut self, class_id: ClassId) -> Result<()> {
        if self.lists.contains_key(&class_id) {
            return Err(IttaError::State(format!("class {class_id} already keyed in cache")));
        }
        self.lists.insert(class_id, Vec::new());
        Ok(())
    }

    fn affinity(&self, class_id: ClassId, query: &[f64], query_norm: f64) -> Option<f64> {
        let list = self.lists.get(&class_id).filter(|l| !l.is_empty())?;
        let c = &self.config;
        Some(
            list.iter()
                .map(|e| {
                    let cos = embedding::dot(query, e.feature.as_slice()) / query_norm;
                    c.residual_weight * (-c.sharpness * (1.0 - cos)).exp()
                })
                .sum(),
        )
    }
}

/// Zero-shot logits refined by the cache.
pub fn tda_predict(
    sample: &EmbeddingSample,
    registry: &ClassRegistry,
    cache: &TdaCache,
    logit_scale: f64,
) -> Result<Prediction> {
    let sims = registry.similarities(&sample.global)?;
    let query_norm = sample.global.norm();
    let mut logits: Vec<f64> = sims.iter().map(|s| logit_scale * s).collect();
    for (logit, entry) in logits.iter_mut().zip(registry.entries()) {
        if let Some(bonus) = cache.affinity(entry.class_id, sample.global.as_slice(), query_norm) {
            *logit += bonus;
        }
    }
    let probabilities = softmax_scaled(&logits, 1.0)?;
    let best = embedding::argmax(&logits);
    Ok(Prediction {
        probabilities,
        class_id: registry.entry(best).class_id,
    })
}

pub struct TdaEngine {
    cache: TdaCache,
    logit_scale: f64,
}

impl TdaEngine {
    pub fn new(config: TdaConfig, logit_scale: f64, registry: &ClassRegistry) -> Result<Self> {
        Ok(TdaEngine {
            cache: TdaCache::new(config, registry.class_ids())?,
            logit_scale,
        })
    }

    pub fn cache(&self) -> &TdaCache {
        &self.cache
    }
}

impl TtaEngine for TdaEngine {
    fn name(&self) -> &'static str {
        "tda"
    }

    fn predict(&self, sample: &EmbeddingSample, registry: &ClassRegistry) -> Result<Prediction> {
        tda_predict(sample, registry, &self.cache, self.logit_scale)
    }

    fn observe(&mut self, sample: &EmbeddingSample, prediction: &Prediction) -> Result<()> {
        self.cache
            .observe(&sample.global, prediction.class_id, &prediction.probabilities);
        Ok(())
    }

    fn on_registry_expanded(&mut self, class_id: ClassId) -> Result<()> {
        self.cache.on_registry_expanded(class_id)
    }
}
