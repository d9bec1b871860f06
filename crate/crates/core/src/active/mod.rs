//! Budgeted active labeling.
//!
//! For every sample the selector runs, in order: the base uncertainty test
//! (or a coin flip for the random strategy), the optional SegAssist
//! background-ratio filter, and finally the budget. A later stage only runs
//! when the earlier ones passed.

mod budget;
mod oracle;
mod segassist;
mod uncertainty;

use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use budget::BudgetState;
pub use oracle::{Oracle, OracleResult};
pub use segassist::{
    background_ratio, bilinear_resize, segassist_select, segment_patches, segment_sample,
    SegmapMode, SegmentationMap,
};
pub use uncertainty::{base_uncertain, uncertainty_score, Thresholds, UncertaintyKind};

use crate::dataset::EmbeddingSample;
use crate::embedding::Probabilities;
use crate::error::{IttaError, Result};
use crate::registry::ClassRegistry;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Random,
    #[default]
    Msp,
    Entropy,
    Margin,
    Segassist,
}

impl Strategy {
    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Random => "random",
            Strategy::Msp => "msp",
            Strategy::Entropy => "entropy",
            Strategy::Margin => "margin",
            Strategy::Segassist => "segassist",
        }
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "random" => Ok(Strategy::Random),
            "msp" => Ok(Strategy::Msp),
            "entropy" => Ok(Strategy::Entropy),
            "margin" => Ok(Strategy::Margin),
            "segassist" => Ok(Strategy::Segassist),
            other => Err(format!("unknown strategy `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DenialReason {
    NotUncertain,
    SegassistRejected,
    BudgetExhausted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionDecision {
    pub uncertain: bool,
    /// Uncertainty score, or the uniform draw for the random strategy.
    pub base_score: f64,
    pub background_ratio: Option<f64>,
    pub selected: bool,
    pub denial_reason: Option<DenialReason>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelectorConfig {
    pub strategy: Strategy,
    /// Base measure used by SegAssist.
    pub base_uncertainty: UncertaintyKind,
    pub thresholds: Thresholds,
    pub alpha: f64,
    pub topk: usize,
    /// Query probability of the random strategy.
    pub random_rate: f64,
    pub segmap_mode: SegmapMode,
    pub upsample_hw: (usize, usize),
}

impl Default for SelectorConfig {
    fn default() -> Self {
        SelectorConfig {
            strategy: Strategy::Msp,
            base_uncertainty: UncertaintyKind::Msp,
            thresholds: Thresholds::default(),
            alpha: 0.95,
            topk: 5,
            random_rate: 0.01,
            segmap_mode: SegmapMode::PatchLevel,
            upsample_hw: (224, 224),
        }
    }
}

/// Draws `true` with probability `r`.
pub fn random_select<R: Rng + ?Sized>(rng: &mut R, r: f64) -> bool {
    random_draw(rng) < r
}

fn random_draw<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random::<f64>()
}

/// Stateful per-run selector. The only state is the random generator.
#[derive(Debug, Clone)]
pub struct Selector {
    config: SelectorConfig,
    rng: ChaCha8Rng,
}

impl Selector {
    pub fn new(config: SelectorConfig, seed: u64) -> Result<Self> {
        if config.topk == 0 {
            return Err(IttaError::config("topk must be at least 1"));
        }
        if config.strategy == Strategy::Random && !(config.random_rate > 0.0 && config.random_rate < 1.0) {
            return Err(IttaError::config("random strategy rate must lie in (0, 1)"));
        }
        Ok(Selector {
            config,
            // separate stream from any other consumer of the run seed
            rng: ChaCha8Rng::seed_from_u64(seed ^ 0x0005_eed0_fa11),
        })
    }

    pub fn config(&self) -> &SelectorConfig {
        &self.config
    }

    /// Runs the selection pipeline for one sample, consuming budget when
    /// the sample is selected.
    pub fn decide(
        &mut self,
        sample: &EmbeddingSample,
        probs: &Probabilities,
        registry: &ClassRegistry,
        budget: &mut BudgetState,
    ) -> Result<SelectionDecision> {
        let cfg = &self.config;
        let (uncertain, base_score) = match cfg.strategy {
            Strategy::Random => {
                let draw = random_draw(&mut self.rng);
                (draw < cfg.random_rate, draw)
            }
            strategy => {
                let kind = match strategy {
                    Strategy::Msp => UncertaintyKind::Msp,
                    Strategy::Entropy => UncertaintyKind::Entropy,
                    Strategy::Margin => UncertaintyKind::Margin,
                    _ => cfg.base_uncertainty,
                };
                let score = match uncertainty_score(kind, probs) {
                    Ok(s) => s,
                    // a single-class registry has no runner-up; treat as certain
                    Err(IttaError::DegenerateInput(_)) => 1.0,
                    Err(e) => return Err(e),
                };
                (base_uncertain(kind, score, &cfg.thresholds), score)
            }
        };
        let mut decision = SelectionDecision {
            uncertain,
            base_score,
            background_ratio: None,
            selected: false,
            denial_reason: None,
        };
        if !uncertain {
            decision.denial_reason = Some(DenialReason::NotUncertain);
            return Ok(decision);
        }
        if cfg.strategy == Strategy::Segassist {
            let upsample = match cfg.segmap_mode {
                SegmapMode::PatchLevel => None,
                SegmapMode::Upsampled => Some(cfg.upsample_hw),
            };
            let map = segment_sample(sample, probs, registry, cfg.topk, upsample)?;
            let ratio = background_ratio(&map);
            decision.background_ratio = Some(ratio);
            if !segassist_select(ratio, cfg.alpha) {
                decision.denial_reason = Some(DenialReason::SegassistRejected);
                return Ok(decision);
            }
        }
        if budget.consume() {
            decision.selected = true;
        } else {
            decision.denial_reason = Some(DenialReason::BudgetExhausted);
        }
        Ok(decision)
    }
}
