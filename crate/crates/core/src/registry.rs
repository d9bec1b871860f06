//! The live classifier: an append-only registry of class text embeddings.
//!
//! Growing the registry only appends a column, so similarities to existing
//! classes are computed exactly as before an expansion. Every argmax and
//! top-k in the crate breaks ties toward the lowest registry index.

use std::collections::HashMap;

use crate::embedding::{self, softmax_scaled, FeatureVector, Probabilities, TextEmbedding};
use crate::error::{IttaError, Result};

/// Class identifier as stored in dataset files.
pub type ClassId = u32;

/// Sentinel id of the reserved "background" class.
pub const BACKGROUND_ID: ClassId = ClassId::MAX;

/// Default multiplier applied to cosine similarities before softmax.
pub const DEFAULT_LOGIT_SCALE: f64 = 100.0;

#[derive(Debug, Clone)]
pub struct ClassRegistry {
    entries: Vec<TextEmbedding>,
    seen_flags: Vec<bool>,
    index: HashMap<ClassId, usize>,
    background: TextEmbedding,
}

impl ClassRegistry {
    /// Builds the initial registry. `initial` classes are flagged as seen.
    pub fn new(initial: Vec<TextEmbedding>, background: TextEmbedding) -> Result<Self> {
        if background.class_id != BACKGROUND_ID {
            return Err(IttaError::State(format!(
                "background must use the sentinel id, got {}",
                background.class_id
            )));
        }
        let mut registry = ClassRegistry {
            entries: Vec::with_capacity(initial.len()),
            seen_flags: Vec::with_capacity(initial.len()),
            index: HashMap::new(),
            background,
        };
        for entry in initial {
            registry.append(entry, true)?;
        }
        Ok(registry)
    }

    fn append(&mut self, entry: TextEmbedding, seen: bool) -> Result<usize> {
        if entry.class_id == BACKGROUND_ID {
            return Err(IttaError::State("background id cannot be registered".into()));
        }
        if self.index.contains_key(&entry.class_id) {
            return Err(IttaError::State(format!(
                "class {} already registered",
                entry.class_id
            )));
        }
        let d = self.background.vector.dim();
        if entry.vector.dim() != d {
            return Err(IttaError::Dimension {
                expected: d,
                found: entry.vector.dim(),
            });
        }
        let idx = self.entries.len();
        self.index.insert(entry.class_id, idx);
        self.entries.push(entry);
        self.seen_flags.push(seen);
        Ok(idx)
    }

    /// Appends a class discovered during the stream. Returns its index.
    pub fn push_discovered(&mut self, entry: TextEmbedding) -> Result<usize> {
        self.append(entry, false)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.background.vector.dim()
    }

    pub fn entries(&self) -> &[TextEmbedding] {
        &self.entries
    }

    pub fn entry(&self, index: usize) -> &TextEmbedding {
        &self.entries[index]
    }

    pub fn background(&self) -> &TextEmbedding {
        &self.background
    }

    pub fn contains(&self, class_id: ClassId) -> bool {
        self.index.contains_key(&class_id)
    }

    pub fn index_of(&self, class_id: ClassId) -> Option<usize> {
        self.index.get(&class_id).copied()
    }

    /// Whether the entry at `index` was part of the initial registry.
    pub fn is_initially_seen(&self, index: usize) -> bool {
        self.seen_flags[index]
    }

    pub fn class_ids(&self) -> impl Iterator<Item = ClassId> + '_ {
        self.entries.iter().map(|e| e.class_id)
    }

    /// Cosine similarity of `query` against every entry, in registry order.
    pub fn similarities(&self, query: &FeatureVector) -> Result<Vec<f64>> {
        if self.entries.is_empty() {
            return Err(IttaError::EmptyRegistry);
        }
        let norm = check_query(query, self.dim())?;
        Ok(self
            .entries
            .iter()
            .map(|e| embedding::dot(query.as_slice(), e.vector.as_slice()) / norm)
            .collect())
    }
}

pub(crate) fn check_query(query: &FeatureVector, dim: usize) -> Result<f64> {
    if query.dim() != dim {
        return Err(IttaError::Dimension {
            expected: dim,
            found: query.dim(),
        });
    }
    let norm = query.norm();
    if norm == 0.0 {
        return Err(IttaError::DegenerateInput("zero query vector".into()));
    }
    Ok(norm)
}

/// Zero-shot classification against the registry (background excluded).
///
/// The prediction is the argmax of the scaled similarities with ties
/// resolved to the lowest registry index.
pub fn classify(
    global: &FeatureVector,
    registry: &ClassRegistry,
    logit_scale: f64,
) -> Result<(Probabilities, ClassId)> {
    let sims = registry.similarities(global)?;
    let logits: Vec<f64> = sims.iter().map(|s| logit_scale * s).collect();
    let probs = softmax_scaled(&sims, logit_scale)?;
    let best = embedding::argmax(&logits);
    Ok((probs, registry.entry(best).class_id))
}

/// The `k` most probable classes in descending order.
pub fn topk_classes(probs: &Probabilities, registry: &ClassRegistry, k: usize) -> Vec<ClassId> {
    topk_indices(probs.as_slice(), k)
        .into_iter()
        .map(|i| registry.entry(i).class_id)
        .collect()
}

/// Indices of the `k` largest values, descending, lowest index first on ties.
pub(crate) fn topk_indices(values: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    // stable sort keeps lower indices ahead of equal values
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    order.truncate(k);
    order
}

#[cfg(test)]
mod tests {
    use super::*;

    fn te(id: ClassId, v: &[f64]) -> TextEmbedding {
        TextEmbedding::new(id, format!("c{id}"), FeatureVector::normalized(v.to_vec()).unwrap())
            .unwrap()
    }

    fn bg(d: usize) -> TextEmbedding {
        let mut v = vec![0.0; d];
        v[d - 1] = 1.0;
        te(BACKGROUND_ID, &v)
    }

    #[test]
    fn singleton_registry() {
        let reg = ClassRegistry::new(vec![te(7, &[1.0, 0.0, 0.0])], bg(3)).unwrap();
        let q = FeatureVector::normalized(vec![0.2, 0.9, 0.1]).unwrap();
        let (p, c) = classify(&q, &reg, 100.0).unwrap();
        assert_eq!(p.as_slice(), &[1.0]);
        assert_eq!(c, 7);
    }

    #[test]
    fn exact_match_dominates() {
        let reg = ClassRegistry::new(
            vec![te(0, &[1.0, 0.0, 0.0, 0.0]), te(1, &[0.0, 1.0, 0.0, 0.0]), te(2, &[0.0, 0.0, 1.0, 0.0])],
            bg(4),
        )
        .unwrap();
        let q = reg.entry(1).vector.clone();
        let (p, c) = classify(&q, &reg, 100.0).unwrap();
        assert_eq!(c, 1);
        // 1 / (1 + 2 e^-100)
        assert!(p.as_slice()[1] > 0.99);
    }

    #[test]
    fn tie_goes_to_lower_index() {
        let reg = ClassRegistry::new(vec![te(5, &[1.0, 1.0, 0.0]), te(3, &[1.0, -1.0, 0.0])], bg(3))
            .unwrap();
        let q = FeatureVector::normalized(vec![1.0, 0.0, 0.0]).unwrap();
        let (p, c) = classify(&q, &reg, 100.0).unwrap();
        assert_eq!(c, 5);
        assert_eq!(p.as_slice()[0], p.as_slice()[1]);
    }

    #[test]
    fn empty_registry_errors() {
        let reg = ClassRegistry::new(vec![], bg(2)).unwrap();
        let q = FeatureVector::normalized(vec![1.0, 0.0]).unwrap();
        assert!(matches!(classify(&q, &reg, 1.0), Err(IttaError::EmptyRegistry)));
    }

    #[test]
    fn duplicates_and_background_rejected() {
        let mut reg = ClassRegistry::new(vec![te(1, &[1.0, 0.0])], bg(2)).unwrap();
        assert!(reg.push_discovered(te(1, &[0.0, 1.0])).is_err());
        assert!(reg.push_discovered(te(BACKGROUND_ID, &[0.0, 1.0])).is_err());
        assert_eq!(reg.push_discovered(te(2, &[0.0, 1.0])).unwrap(), 1);
        assert!(reg.is_initially_seen(0));
        assert!(!reg.is_initially_seen(1));
    }

    #[test]
    fn topk_cases() {
        let reg = ClassRegistry::new(
            vec![te(10, &[1.0, 0.0]), te(11, &[0.0, 1.0]), te(12, &[1.0, 1.0])],
            bg(2),
        )
        .unwrap();
        let p = Probabilities::new(vec![0.5, 0.3, 0.2]).unwrap();
        assert_eq!(topk_classes(&p, &reg, 5), vec![10, 11, 12]);
        assert_eq!(topk_classes(&p, &reg, 2), vec![10, 11]);
        let p = Probabilities::new(vec![0.2, 0.4, 0.4]).unwrap();
        assert_eq!(topk_classes(&p, &reg, 1), vec![11]);
        assert_eq!(topk_classes(&p, &reg, 2), vec![11, 12]);
    }
}
