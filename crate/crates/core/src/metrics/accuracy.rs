use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{IttaError, Result};
use crate::registry::ClassId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub stream_index: usize,
    pub true_class_id: ClassId,
    pub predicted_class_id: ClassId,
    pub true_is_initially_seen: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassTally {
    pub correct: u64,
    pub total: u64,
    pub initially_seen: bool,
}

/// Running per-class accuracy. Seen/unseen membership is by true class as
/// fixed at stream construction, not by detection status.
#[derive(Debug, Clone, Default)]
pub struct AccuracyState {
    per_class: BTreeMap<ClassId, ClassTally>,
    last_index: Option<usize>,
}

impl AccuracyState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record(&mut self, record: PredictionRecord) -> Result<()> {
        if let Some(last) = self.last_index {
            if record.stream_index <= last {
                return Err(IttaError::State(format!(
                    "stream index {} does not follow {last}",
                    record.stream_index
                )));
            }
        }
        self.last_index = Some(record.stream_index);
        let tally = self.per_class.entry(record.true_class_id).or_insert(ClassTally {
            initially_seen: record.true_is_initially_seen,
            ..ClassTally::default()
        });
        tally.total += 1;
        if record.predicted_class_id == record.true_class_id {
            tally.correct += 1;
        }
        Ok(())
    }

    pub fn per_class(&self) -> &BTreeMap<ClassId, ClassTally> {
        &self.per_class
    }

    /// `(acc_seen, acc_unseen)` in percent; `None` when a side has no samples.
    pub fn final_accuracies(&self) -> (Option<f64>, Option<f64>) {
        let side = |seen: bool| {
            let (c, t) = self
                .per_class
                .values()
                .filter(|t| t.initially_seen == seen)
                .fold((0u64, 0u64), |(c, t), x| (c + x.correct, t + x.total));
            (t > 0).then(|| 100.0 * c as f64 / t as f64)
        };
        (side(true), side(false))
    }
}

/// `2ab / (a + b)`, 0 when both are 0.
pub fn harmonic_mean(a: f64, b: f64) -> f64 {
    if a + b == 0.0 {
        0.0
    } else {
        2.0 * a * b / (a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(i: usize, t: ClassId, p: ClassId, seen: bool) -> PredictionRecord {
        PredictionRecord {
            stream_index: i,
            true_class_id: t,
            predicted_class_id: p,
            true_is_initially_seen: seen,
        }
    }

    #[test]
    fn three_of_four_seen() {
        let mut s = AccuracyState::new();
        s.record(rec(1, 0, 0, true)).unwrap();
        s.record(rec(2, 1, 1, true)).unwrap();
        s.record(rec(3, 0, 1, true)).unwrap();
        s.record(rec(4, 1, 1, true)).unwrap();
        assert_eq!(s.final_accuracies(), (Some(75.0), None));
    }

    #[test]
    fn all_correct() {
        let mut s = AccuracyState::new();
        s.record(rec(1, 0, 0, true)).unwrap();
        s.record(rec(2, 5, 5, false)).unwrap();
        assert_eq!(s.final_accuracies(), (Some(100.0), Some(100.0)));
    }

    #[test]
    fn out_of_order_rejected() {
        let mut s = AccuracyState::new();
        s.record(rec(3, 0, 0, true)).unwrap();
        assert!(matches!(s.record(rec(3, 0, 0, true)), Err(IttaError::State(_))));
        assert!(s.record(rec(2, 0, 0, true)).is_err());
    }

    #[test]
    fn harmonic_mean_values() {
        assert!((harmonic_mean(76.99, 54.83) - 64.05).abs() <= 0.01);
        assert!((harmonic_mean(80.53, 62.66) - 70.48).abs() <= 0.01);
        assert_eq!(harmonic_mean(42.0, 42.0), 42.0);
        assert_eq!(harmonic_mean(42.0, 0.0), 0.0);
        assert_eq!(harmonic_mean(0.0, 0.0), 0.0);
    }
}
