//! Embedding vectors and the numeric kernels that act on them.
//!
//! Everything is stored as `f64` in memory even though dataset files hold
//! `f32`; softmax over scaled cosine similarities is evaluated with the
//! usual max-subtraction so large logit scales stay finite.

use crate::error::{IttaError, Result};
use crate::registry::ClassId;

/// Accepted deviation of `‖v‖₂` from 1 for vectors flagged unit-norm.
pub const UNIT_NORM_TOL: f64 = 1e-4;

/// Vectors within this distance of unit norm are left untouched on
/// ingestion. It covers the rounding introduced by an `f32` round trip, so
/// re-reading a file we wrote does not perturb a single bit.
const RENORM_SLACK: f64 = 2e-6;

/// A dense embedding vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(Vec<f64>);

impl FeatureVector {
    /// Wraps raw values, rejecting NaN and infinities.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(IttaError::DegenerateInput("non-finite coordinate".into()));
        }
        Ok(FeatureVector(values))
    }

    /// Scales `values` to unit length.
    pub fn normalized(values: Vec<f64>) -> Result<Self> {
        let mut v = Self::new(values)?;
        let norm = v.norm();
        if norm == 0.0 {
            return Err(IttaError::DegenerateInput("zero vector".into()));
        }
        v.0.iter_mut().for_each(|x| *x /= norm);
        Ok(v)
    }

    /// Accepts a vector that claims to be unit-norm.
    ///
    /// The norm must lie within [`UNIT_NORM_TOL`] of 1. Vectors that are off
    /// by more than `f32` rounding are rescaled.
    pub fn unit(values: Vec<f64>) -> Result<Self> {
        let v = Self::new(values)?;
        let norm = v.norm();
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(IttaError::DegenerateInput(format!(
                "expected unit norm, got {norm}"
            )));
        }
        if (norm - 1.0).abs() > RENORM_SLACK {
            return Ok(FeatureVector(v.0.into_iter().map(|x| x / norm).collect()));
        }
        Ok(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn norm(&self) -> f64 {
        dot(&self.0, &self.0).sqrt()
    }

    pub fn is_unit(&self) -> bool {
        (self.norm() - 1.0).abs() <= UNIT_NORM_TOL
    }

    /// Inner product. Callers must have checked dimensions.
    pub fn dot(&self, other: &FeatureVector) -> f64 {
        debug_assert_eq!(self.dim(), other.dim());
        dot(&self.0, &other.0)
    }

    /// Rounds every coordinate through `f32`, the on-disk precision.
    pub fn quantized(&self) -> FeatureVector {
        FeatureVector(self.0.iter().map(|&x| x as f32 as f64).collect())
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A `height × width` grid of patch embeddings, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchGrid {
    height: usize,
    width: usize,
    features: Vec<FeatureVector>,
}

impl PatchGrid {
    pub fn new(height: usize, width: usize, features: Vec<FeatureVector>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(IttaError::DegenerateInput("patch grid must be at least 1x1".into()));
        }
        if features.len() != height * width {
            return Err(IttaError::Dimension {
                expected: height * width,
                found: features.len(),
            });
        }
        let d = features[0].dim();
        if let Some(bad) = features.iter().find(|f| f.dim() != d) {
            return Err(IttaError::Dimension {
                expected: d,
                found: bad.dim(),
            });
        }
        Ok(PatchGrid {
            height,
            width,
            features,
        })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dim(&self) -> usize {
        self.features[0].dim()
    }

    pub fn features(&self) -> &[FeatureVector] {
        &self.features
    }

    pub fn get(&self, row: usize, col: usize) -> &FeatureVector {
        &self.features[row * self.width + col]
    }
}

/// Text-encoder embedding of a class prompt.
#[derive(Debug, Clone, PartialEq)]
pub struct TextEmbedding {
    pub class_id: ClassId,
    pub name: String,
    pub vector: FeatureVector,
}

impl TextEmbedding {
    pub fn new(class_id: ClassId, name: impl Into<String>, vector: FeatureVector) -> Result<Self> {
        if !vector.is_unit() {
            return Err(IttaError::DegenerateInput(format!(
                "text embedding for class {class_id} is not unit-norm"
            )));
        }
        Ok(TextEmbedding {
            class_id,
            name: name.into(),
            vector,
        })
    }
}

/// A probability vector over the registry entries present when it was
/// computed.
#[derive(Debug, Clone, PartialEq)]
pub struct Probabilities(Vec<f64>);

impl Probabilities {
    /// Wraps a vector that is already a distribution (tests, replay).
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(IttaError::EmptyInput);
        }
        if values.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(IttaError::DegenerateInput("probability outside [0, 1]".into()));
        }
        let total: f64 = values.iter().sum();
        if (total - 1.0).abs() > 1e-6 {
            return Err(IttaError::DegenerateInput(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(Probabilities(values))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Index of the largest probability; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        argmax(&self.0)
    }

    pub fn max(&self) -> f64 {
        self.0[self.argmax()]
    }

    /// Shannon entropy (natural log) divided by `ln n`, so it lies in
    /// `[0, 1]`. Defined as 0 for a single class.
    pub fn normalized_entropy(&self) -> f64 {
        let n = self.0.len();
        if n <= 1 {
            return 0.0;
        }
        let h: f64 = self
            .0
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|&p| -p * p.ln())
            .sum();
        (h / (n as f64).ln()).clamp(0.0, 1.0)
    }
}

/// Index of the largest value, lowest index on ties. Panics on empty input.
pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Cosine of the angle between `a` and `b`, clamped to `[-1, 1]`.
pub fn cosine_similarity(a: &FeatureVector, b: &FeatureVector) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(IttaError::Dimension {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let (na, nb) = (a.norm(), b.norm());
    if na == 0.0 || nb == 0.0 {
        return Err(IttaError::DegenerateInput("zero vector".into()));
    }
    Ok((a.dot(b) / (na * nb)).clamp(-1.0, 1.0))
}

/// `softmax(scale · s)`, evaluated with the max subtracted.
pub fn softmax_scaled(similarities: &[f64], logit_scale: f64) -> Result<Probabilities> {
    if similarities.is_empty() {
        return Err(IttaError::EmptyInput);
    }
    if similarities.iter().any(|s| !s.is_finite()) || !logit_scale.is_finite() {
        return Err(IttaError::DegenerateInput("non-finite logit".into()));
    }
    let logits: Vec<f64> = similarities.iter().map(|s| logit_scale * s).collect();
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    Ok(Probabilities(exps.into_iter().map(|e| e / total).collect()))
}
