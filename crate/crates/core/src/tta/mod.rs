//! Test-time adaptation engines.
//!
//! An engine sees one sample at a time. `predict` never mutates state; all
//! adaptation happens in `observe`, which only ever receives the engine's
//! own pseudo-label. Ground-truth labels reach the run solely through
//! registry expansion.

mod tda;
mod zeroshot;

use serde::{Deserialize, Serialize};

pub use tda::{tda_predict, TdaCache, TdaCacheEntry, TdaConfig, TdaEngine};
pub use zeroshot::{zs_predict, ZeroShot};

use crate::dataset::EmbeddingSample;
use crate::embedding::Probabilities;
use crate::error::Result;
use crate::registry::{ClassId, ClassRegistry};

/// A probability vector over the registry plus the predicted class.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub probabilities: Probabilities,
    pub class_id: ClassId,
}

pub trait TtaEngine: Send {
    fn name(&self) -> &'static str;

    /// Predicts over the current registry. Must be side-effect free.
    fn predict(&self, sample: &EmbeddingSample, registry: &ClassRegistry) -> Result<Prediction>;

    /// Adapts on the engine's own prediction for `sample`.
    fn observe(&mut self, sample: &EmbeddingSample, prediction: &Prediction) -> Result<()>;

    /// Called after `class_id` was appended to the registry.
    fn on_registry_expanded(&mut self, class_id: ClassId) -> Result<()>;
}

/// Engine selector used in run configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TtaKind {
    #[default]
    Zseval,
    Tda,
}

impl TtaKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TtaKind::Zseval => "zseval",
            TtaKind::Tda => "tda",
        }
    }
}

impl std::str::FromStr for TtaKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "zseval" | "zs-eval" | "zs" => Ok(TtaKind::Zseval),
            "tda" => Ok(TtaKind::Tda),
            other => Err(format!("unknown tta engine `{other}`")),
        }
    }
}

/// Builds an engine for a run over `registry`.
pub fn build_engine(
    kind: TtaKind,
    logit_scale: f64,
    tda: &TdaConfig,
    registry: &ClassRegistry,
) -> Result<Box<dyn TtaEngine>> {
    Ok(match kind {
        TtaKind::Zseval => Box::new(ZeroShot::new(logit_scale)),
        TtaKind::Tda => Box::new(TdaEngine::new(tda.clone(), logit_scale, registry)?),
    })
}
