//! Incremental class detection delay.
//!
//! `n_gt(i)` and `n_det(i)` count unseen classes introduced / detected at or
//! before sample `i`, divided by the number of unseen classes. Both are
//! step functions on the grid `i/T`; their areas use right rectangles and
//! the delay is `AUC(n_gt) - AUC(n_det)`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{IttaError, Result};
use crate::registry::ClassId;

/// Stream indices are 1-based.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionTimeline {
    pub introductions: BTreeMap<ClassId, usize>,
    pub detections: BTreeMap<ClassId, usize>,
    pub stream_length: usize,
}

impl DetectionTimeline {
    pub fn new(stream_length: usize) -> Self {
        DetectionTimeline {
            stream_length,
            ..Self::default()
        }
    }

    /// Records the first occurrence of an unseen class; later calls for
    /// the same class are ignored.
    pub fn introduce(&mut self, class_id: ClassId, index: usize) {
        self.introductions.entry(class_id).or_insert(index);
    }

    pub fn detect(&mut self, class_id: ClassId, index: usize) -> Result<()> {
        match self.introductions.get(&class_id) {
            None => Err(IttaError::State(format!(
                "class {class_id} detected before it was introduced"
            ))),
            Some(&intro) if index < intro => Err(IttaError::State(format!(
                "class {class_id} detected at {index} before introduction at {intro}"
            ))),
            Some(_) => {
                self.detections.entry(class_id).or_insert(index);
                Ok(())
            }
        }
    }

    /// Number of unseen classes that occur in the stream.
    pub fn total_unseen(&self) -> usize {
        self.introductions.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.stream_length == 0 {
            return Err(IttaError::Invariant("empty timeline".into()));
        }
        for (c, &i) in &self.introductions {
            if i == 0 || i > self.stream_length {
                return Err(IttaError::Invariant(format!("class {c} introduced at {i}")));
            }
        }
        for (c, &d) in &self.detections {
            match self.introductions.get(c) {
                Some(&i) if d >= i && d <= self.stream_length => {}
                _ => return Err(IttaError::Invariant(format!("class {c} detected at {d}"))),
            }
        }
        Ok(())
    }
}

/// Cumulative normalized introduction and detection curves, one value per
/// sample index `1..=T`.
#[derive(Debug, Clone, PartialEq)]
pub struct Curves {
    pub n_gt: Vec<f64>,
    pub n_det: Vec<f64>,
}

pub fn build_curves(timeline: &DetectionTimeline) -> Result<Curves> {
    timeline.validate()?;
    let u = timeline.total_unseen();
    if u == 0 {
        return Err(IttaError::Invariant("no unseen classes in stream".into()));
    }
    let t = timeline.stream_length;
    let step = |events: &BTreeMap<ClassId, usize>| {
        let mut bumps = vec![0usize; t + 1];
        for &i in events.values() {
            bumps[i] += 1;
        }
        let mut count = 0usize;
        bumps[1..]
            .iter()
            .map(|b| {
                count += b;
                count as f64 / u as f64
            })
            .collect::<Vec<f64>>()
    };
    Ok(Curves {
        n_gt: step(&timeline.introductions),
        n_det: step(&timeline.detections),
    })
}

/// Right-rectangle area of a nondecreasing curve on the grid `i/T`.
pub fn auc_step(curve: &[f64]) -> Result<f64> {
    if curve.is_empty() {
        return Err(IttaError::EmptyInput);
    }
    if curve.windows(2).any(|w| w[1] < w[0]) {
        return Err(IttaError::Invariant("curve is decreasing".into()));
    }
    if curve.iter().any(|v| !(0.0..=1.0).contains(v)) {
        return Err(IttaError::Invariant("curve leaves [0, 1]".into()));
    }
    Ok(curve.iter().sum::<f64>() / curve.len() as f64)
}

/// `AUC(n_gt) - AUC(n_det)` in `[0, 1]`; 0 when no unseen class occurs.
pub fn icdd(timeline: &DetectionTimeline) -> Result<f64> {
    timeline.validate()?;
    if timeline.total_unseen() == 0 {
        return Ok(0.0);
    }
    let curves = build_curves(timeline)?;
    Ok(auc_step(&curves.n_gt)? - auc_step(&curves.n_det)?)
}
