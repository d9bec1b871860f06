use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::active::{SegmapMode, SelectorConfig, Strategy, Thresholds, UncertaintyKind};
use crate::dataset::ShufflePolicy;
use crate::error::{IttaError, Result};
use crate::registry::DEFAULT_LOGIT_SCALE;
use crate::tta::{TdaConfig, TtaKind};

/// Where a run writes its artifacts. Any path left unset is skipped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OutputConfig {
    pub report: Option<PathBuf>,
    pub events: Option<PathBuf>,
    pub curves: Option<PathBuf>,
    pub curve_stride: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            report: None,
            events: None,
            curves: None,
            curve_stride: 1,
        }
    }
}

/// Full configuration of one stream run. Every field has a default, so a
/// config file only lists what it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    /// Dataset files, concatenated in order.
    pub datasets: Vec<PathBuf>,
    /// Optional stream sidecar. Without one the stream is built from
    /// `unseen_ratio`, `seed` and `stream_policy`.
    pub stream: Option<PathBuf>,
    pub unseen_ratio: f64,
    pub stream_policy: ShufflePolicy,
    pub strategy: Strategy,
    pub base_uncertainty: UncertaintyKind,
    pub tta: TtaKind,
    pub tau_msp: f64,
    pub tau_entropy: f64,
    pub tau_margin: f64,
    pub alpha: f64,
    pub topk: usize,
    pub budget_rate: f64,
    pub budget_window: u64,
    pub logit_scale: f64,
    pub seed: u64,
    pub segmap_mode: SegmapMode,
    pub upsample_hw: [usize; 2],
    pub tda: TdaConfig,
    pub output: OutputConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let thresholds = Thresholds::default();
        RunConfig {
            datasets: Vec::new(),
            stream: None,
            unseen_ratio: 0.25,
            stream_policy: ShufflePolicy::Uniform,
            strategy: Strategy::Msp,
            base_uncertainty: UncertaintyKind::Msp,
            tta: TtaKind::Zseval,
            tau_msp: thresholds.msp,
            tau_entropy: thresholds.entropy,
            tau_margin: thresholds.margin,
            alpha: 0.95,
            topk: 5,
            budget_rate: 0.01,
            budget_window: 1000,
            logit_scale: DEFAULT_LOGIT_SCALE,
            seed: 0,
            segmap_mode: SegmapMode::PatchLevel,
            upsample_hw: [224, 224],
            tda: TdaConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path.as_ref())?;
        serde_json::from_str(&text)
            .map_err(|e| IttaError::config(format!("{}: {e}", path.as_ref().display())))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.budget_rate > 0.0 && self.budget_rate < 1.0) {
            return Err(IttaError::config(format!(
                "budget_rate {} must lie in (0, 1)",
                self.budget_rate
            )));
        }
        if self.budget_window == 0 {
            return Err(IttaError::config("budget_window must be at least 1"));
        }
        if self.topk == 0 {
            return Err(IttaError::config("topk must be at least 1"));
        }
        if !(self.logit_scale >= 0.0 && self.logit_scale.is_finite()) {
            return Err(IttaError::config("logit_scale must be finite and >= 0"));
        }
        if self.upsample_hw.contains(&0) {
            return Err(IttaError::config("upsample_hw must be positive"));
        }
        if self.output.curve_stride == 0 {
            return Err(IttaError::config("curve_stride must be at least 1"));
        }
        for (name, v) in [
            ("tau_msp", self.tau_msp),
            ("tau_entropy", self.tau_entropy),
            ("tau_margin", self.tau_margin),
            ("alpha", self.alpha),
        ] {
            if !v.is_finite() {
                return Err(IttaError::config(format!("{name} must be finite")));
            }
        }
        self.tda.validate()?;
        // rejects r·N < 1
        crate::active::BudgetState::new(self.budget_rate, self.budget_window)?;
        Ok(())
    }

    pub fn selector_config(&self) -> SelectorConfig {
        SelectorConfig {
            strategy: self.strategy,
            base_uncertainty: self.base_uncertainty,
            thresholds: Thresholds {
                msp: self.tau_msp,
                entropy: self.tau_entropy,
                margin: self.tau_margin,
            },
            alpha: self.alpha,
            topk: self.topk,
            random_rate: self.budget_rate,
            segmap_mode: self.segmap_mode,
            upsample_hw: (self.upsample_hw[0], self.upsample_hw[1]),
        }
    }

    /// The config as echoed into reports: everything except output paths.
    pub fn echo(&self) -> serde_json::Value {
        let mut echo = self.clone();
        echo.output = OutputConfig::default();
        serde_json::to_value(echo).expect("run config serializes")
    }
}
