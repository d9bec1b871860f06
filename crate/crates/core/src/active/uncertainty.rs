use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::embedding::Probabilities;
use crate::error::{IttaError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UncertaintyKind {
    #[default]
    Msp,
    Entropy,
    Margin,
}

impl UncertaintyKind {
    pub fn as_str(self) -> &'static str {
        match self {
            UncertaintyKind::Msp => "msp",
            UncertaintyKind::Entropy => "entropy",
            UncertaintyKind::Margin => "margin",
        }
    }
}

impl FromStr for UncertaintyKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "msp" => Ok(UncertaintyKind::Msp),
            "entropy" => Ok(UncertaintyKind::Entropy),
            "margin" => Ok(UncertaintyKind::Margin),
            other => Err(format!("unknown uncertainty measure `{other}`")),
        }
    }
}

/// Per-measure uncertainty thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Thresholds {
    pub msp: f64,
    pub entropy: f64,
    pub margin: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            msp: 0.2,
            entropy: 0.5,
            margin: 0.1,
        }
    }
}

/// MSP, normalized entropy, or top-1 minus top-2 margin.
pub fn uncertainty_score(kind: UncertaintyKind, probs: &Probabilities) -> Result<f64> {
    match kind {
        UncertaintyKind::Msp => Ok(probs.max()),
        UncertaintyKind::Entropy => Ok(probs.normalized_entropy()),
        UncertaintyKind::Margin => {
            let p = probs.as_slice();
            if p.len() < 2 {
                return Err(IttaError::DegenerateInput(
                    "margin needs at least two classes".into(),
                ));
            }
            let (mut first, mut second) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for &x in p {
                if x > first {
                    second = first;
                    first = x;
                } else if x > second {
                    second = x;
                }
            }
            Ok(first - second)
        }
    }
}

/// Strict comparisons: low MSP, high entropy, or small margin.
pub fn base_uncertain(kind: UncertaintyKind, score: f64, thresholds: &Thresholds) -> bool {
    match kind {
        UncertaintyKind::Msp => score < thresholds.msp,
        UncertaintyKind::Entropy => score > thresholds.entropy,
        UncertaintyKind::Margin => score < thresholds.margin,
    }
}
