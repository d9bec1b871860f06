//! Seen/unseen class partition and the sample order of a test stream.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{IttaError, Result};
use crate::registry::ClassId;

/// How samples are ordered in the stream.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ShufflePolicy {
    /// Seeded uniform shuffle of all samples, both splits interleaved.
    #[default]
    Uniform,
    /// Keep the file order.
    FileOrder,
    /// The first `onset` fraction of the stream holds only seen-class
    /// samples; the remainder is a uniform mix of everything left.
    Staged { onset: f64 },
}

/// JSON sidecar describing one stream over a dataset.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamSpec {
    pub seed: u64,
    pub seen_class_ids: Vec<ClassId>,
    pub unseen_class_ids: Vec<ClassId>,
    pub order: Vec<usize>,
}

impl StreamSpec {
    /// Checks this stream against the dataset it will drive.
    pub fn validate(&self, ds: &Dataset) -> Result<()> {
        let seen: BTreeSet<_> = self.seen_class_ids.iter().copied().collect();
        let unseen: BTreeSet<_> = self.unseen_class_ids.iter().copied().collect();
        if seen.len() != self.seen_class_ids.len() || unseen.len() != self.unseen_class_ids.len() {
            return Err(IttaError::config("duplicate class id in stream split"));
        }
        if let Some(c) = seen.intersection(&unseen).next() {
            return Err(IttaError::config(format!("class {c} is both seen and unseen")));
        }
        for c in seen.iter().chain(&unseen) {
            if ds.class(*c).is_none() {
                return Err(IttaError::config(format!("class {c} not in dataset")));
            }
        }
        let mut hit = vec![false; ds.len()];
        for &i in &self.order {
            if i >= ds.len() || std::mem::replace(&mut hit[i], true) {
                return Err(IttaError::config("order is not a permutation of the samples"));
            }
        }
        if self.order.len() != ds.len() {
            return Err(IttaError::config("order is not a permutation of the samples"));
        }
        for &i in &self.order {
            let c = ds.samples[i].class_id;
            if !seen.contains(&c) && !unseen.contains(&c) {
                return Err(IttaError::config(format!("class {c} missing from split")));
            }
        }
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

/// Number of unseen classes for an `unseen:seen` ratio `r`:
/// `round_half_up(total · r / (1 + r))`, at least 1.
pub fn unseen_class_count(total: usize, unseen_ratio: f64) -> usize {
    let exact = total as f64 * unseen_ratio / (1.0 + unseen_ratio);
    // the epsilon keeps exact halves like 2.5 from landing at 2.4999…
    ((exact + 0.5 + 1e-9).floor() as usize).max(1)
}

/// Partitions classes and orders samples, deterministically in `seed`.
pub fn build_stream(
    ds: &Dataset,
    unseen_ratio: f64,
    seed: u64,
    policy: ShufflePolicy,
) -> Result<StreamSpec> {
    let total = ds.classes.len();
    if total < 2 {
        return Err(IttaError::config("need at least two classes to split"));
    }
    if !(unseen_ratio > 0.0 && unseen_ratio.is_finite()) {
        return Err(IttaError::config(format!("unseen ratio {unseen_ratio} must be positive")));
    }
    let n_unseen = unseen_class_count(total, unseen_ratio);
    if n_unseen >= total {
        return Err(IttaError::config(format!(
            "ratio {unseen_ratio} leaves no seen classes out of {total}"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ids = ds.class_ids();
    ids.sort_unstable();
    ids.shuffle(&mut rng);
    let mut unseen_class_ids = ids[..n_unseen].to_vec();
    let mut seen_class_ids = ids[n_unseen..].to_vec();
    unseen_class_ids.sort_unstable();
    seen_class_ids.sort_unstable();

    let n = ds.len();
    let order = match policy {
        ShufflePolicy::FileOrder => (0..n).collect(),
        ShufflePolicy::Uniform => {
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            order
        }
        ShufflePolicy::Staged { onset } => {
            if !(0.0..=1.0).contains(&onset) {
                return Err(IttaError::config(format!("staged onset {onset} outside [0, 1]")));
            }
            let is_unseen = |i: usize| unseen_class_ids.binary_search(&ds.samples[i].class_id).is_ok();
            let (mut seen_idx, unseen_idx): (Vec<usize>, Vec<usize>) =
                (0..n).partition(|&i| !is_unseen(i));
            let prefix = (onset * n as f64).round() as usize;
            if prefix > seen_idx.len() {
                return Err(IttaError::config(format!(
                    "staged onset needs {prefix} seen samples, dataset has {}",
                    seen_idx.len()
                )));
            }
            seen_idx.shuffle(&mut rng);
            let mut rest: Vec<usize> = seen_idx.split_off(prefix);
            rest.extend(unseen_idx);
            rest.shuffle(&mut rng);
            seen_idx.extend(rest);
            seen_idx
        }
    };

    Ok(StreamSpec {
        seed,
        seen_class_ids,
        unseen_class_ids,
        order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{synth_generate, SynthConfig};

    #[test]
    fn split_counts_at_common_ratios() {
        assert_eq!(unseen_class_count(200, 0.25), 40);
        // 5 · 1/2 = 2.5 rounds half-up
        assert_eq!(unseen_class_count(5, 1.0), 3);
        assert_eq!(unseen_class_count(3, 0.01), 1);
    }

    fn ds() -> Dataset {
        synth_generate(&SynthConfig {
            d: 8,
            num_seen: 4,
            num_unseen: 1,
            samples_per_class: 6,
            patch_h: 1,
            patch_w: 1,
            ..SynthConfig::default()
        })
        .unwrap()
        .dataset
    }

    #[test]
    fn deterministic_and_valid() {
        let ds = ds();
        let a = build_stream(&ds, 0.25, 3, ShufflePolicy::Uniform).unwrap();
        let b = build_stream(&ds, 0.25, 3, ShufflePolicy::Uniform).unwrap();
        assert_eq!(a, b);
        a.validate(&ds).unwrap();
        assert_eq!(a.unseen_class_ids.len(), 1);
        assert_eq!(a.seen_class_ids.len(), 4);
    }

    #[test]
    fn five_classes_ratio_one() {
        let ds = ds();
        let s = build_stream(&ds, 1.0, 0, ShufflePolicy::FileOrder).unwrap();
        assert_eq!((s.unseen_class_ids.len(), s.seen_class_ids.len()), (3, 2));
        assert_eq!(s.order, (0..ds.len()).collect::<Vec<_>>());
    }

    #[test]
    fn ratio_without_seen_classes_is_config_error() {
        assert!(matches!(
            build_stream(&ds(), 50.0, 0, ShufflePolicy::Uniform),
            Err(IttaError::Config(_))
        ));
    }

    #[test]
    fn staged_prefix_is_seen_only() {
        let ds = ds();
        let s = build_stream(&ds, 0.25, 9, ShufflePolicy::Staged { onset: 0.5 }).unwrap();
        s.validate(&ds).unwrap();
        for &i in &s.order[..15] {
            assert!(s.seen_class_ids.contains(&ds.samples[i].class_id));
        }
    }

    #[test]
    fn validate_rejects_non_permutation() {
        let ds = ds();
        let mut s = build_stream(&ds, 0.25, 1, ShufflePolicy::Uniform).unwrap();
        s.order[0] = s.order[1];
        assert!(s.validate(&ds).is_err());
    }
}
