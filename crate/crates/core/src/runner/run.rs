//! The per-sample loop: tick budget, predict, score, select, query, adapt.

use std::collections::{BTreeMap, HashSet};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use crate::active::{BudgetState, DenialReason, Oracle, OracleResult, Selector};
use crate::dataset::{build_stream, Dataset, StreamSpec};
use crate::embedding::TextEmbedding;
use crate::error::{IttaError, Result};
use crate::metrics::{
    build_curves, harmonic_mean, icdd, AccuracyState, Curves, DetectionEntry, DetectionTimeline,
    PredictionRecord, RunReport,
};
use crate::registry::{topk_indices, ClassId, ClassRegistry};
use crate::tta::build_engine;

/// Tolerance for matching a class embedding across concatenated files.
const MERGE_TOL: f64 = 1e-4;

/// One line of the event log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEvent {
    /// 1-based position in the stream.
    pub index: usize,
    pub true_class: ClassId,
    pub prediction: ClassId,
    /// Up to five `(class, probability)` pairs, most probable first.
    pub top5: Vec<(ClassId, f64)>,
    pub registry_size: usize,
    pub strategy: String,
    pub uncertain: bool,
    pub base_score: f64,
    pub background_ratio: Option<f64>,
    pub selected: bool,
    pub denial_reason: Option<DenialReason>,
    pub oracle: Option<OracleResult>,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub report: RunReport,
    pub events: Vec<RunEvent>,
    /// `None` when the stream held no unseen class.
    pub curves: Option<Curves>,
    pub final_budget: BudgetState,
    pub final_registry_size: usize,
}

/// Loads the configured datasets, builds or loads the stream, and runs it.
pub fn run_stream(config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    let ds = load_datasets(&config.datasets)?;
    let stream = match &config.stream {
        Some(path) => StreamSpec::load(path)?,
        None => build_stream(&ds, config.unseen_ratio, config.seed, config.stream_policy)?,
    };
    run_protocol(&ds, &stream, config)
}

/// Loads and concatenates dataset files. Classes are matched by name; a
/// class present in several files must carry the same text embedding.
pub fn load_datasets(paths: &[std::path::PathBuf]) -> Result<Dataset> {
    let (first, rest) = paths
        .split_first()
        .ok_or_else(|| IttaError::config("no dataset given"))?;
    let mut merged = Dataset::load(first)?;
    for path in rest {
        let next = Dataset::load(path)?;
        merged = concat_datasets(merged, next)?;
    }
    Ok(merged)
}

/// Appends `next` to `base`, mapping `next`'s classes onto `base` by name.
pub fn concat_datasets(base: Dataset, next: Dataset) -> Result<Dataset> {
    if base.dim() != next.dim() {
        return Err(IttaError::Dimension {
            expected: base.dim(),
            found: next.dim(),
        });
    }
    let close = |a: &TextEmbedding, b: &TextEmbedding| {
        a.vector
            .as_slice()
            .iter()
            .zip(b.vector.as_slice())
            .all(|(x, y)| (x - y).abs() <= MERGE_TOL)
    };
    if !close(&base.background, &next.background) {
        return Err(IttaError::Data("background embeddings disagree across files".into()));
    }
    let Dataset {
        mut classes,
        background,
        mut samples,
        ..
    } = base;
    let mut remap: BTreeMap<ClassId, ClassId> = BTreeMap::new();
    for class in next.classes {
        match classes.iter().find(|c| c.name == class.name) {
            Some(existing) => {
                if !close(existing, &class) {
                    return Err(IttaError::Data(format!(
                        "class `{}` has different embeddings across files",
                        class.name
                    )));
                }
                remap.insert(class.class_id, existing.class_id);
            }
            None => {
                let id = classes.len() as ClassId;
                remap.insert(class.class_id, id);
                classes.push(TextEmbedding { class_id: id, ..class });
            }
        }
    }
    samples.extend(next.samples.into_iter().map(|mut s| {
        s.class_id = remap[&s.class_id];
        s
    }));
    Dataset::from_parts(classes, background, samples)
}

/// Runs the incremental protocol over `stream`.
pub fn run_protocol(ds: &Dataset, stream: &StreamSpec, config: &RunConfig) -> Result<RunOutcome> {
    config.validate()?;
    stream.validate(ds)?;
    if stream.order.is_empty() {
        return Err(IttaError::EmptyStream);
    }
    if config.strategy == crate::active::Strategy::Segassist && !ds.has_patches() {
        return Err(IttaError::config("segassist needs a dataset with patch features"));
    }

    let mut seen_ids = stream.seen_class_ids.clone();
    seen_ids.sort_unstable();
    let initial = seen_ids
        .iter()
        .map(|&c| ds.class(c).cloned().expect("validated"))
        .collect();
    let mut registry = ClassRegistry::new(initial, ds.background.clone())?;
    let mut engine = build_engine(config.tta, config.logit_scale, &config.tda, &registry)?;
    let mut budget = BudgetState::new(config.budget_rate, config.budget_window)?;
    let mut selector = Selector::new(config.selector_config(), config.seed)?;
    let oracle = Oracle::new(&ds.classes);
    let unseen: HashSet<ClassId> = stream.unseen_class_ids.iter().copied().collect();

    let t = stream.order.len();
    let mut accuracy = AccuracyState::new();
    let mut timeline = DetectionTimeline::new(t);
    let mut events = Vec::with_capacity(t);
    let mut queries_on_unseen = 0u64;

    for (pos, &sample_idx) in stream.order.iter().enumerate() {
        let index = pos + 1;
        let sample = &ds.samples[sample_idx];
        let is_unseen = unseen.contains(&sample.class_id);

        budget.tick();
        let prediction = engine.predict(sample, &registry)?;
        accuracy.record(PredictionRecord {
            stream_index: index,
            true_class_id: sample.class_id,
            predicted_class_id: prediction.class_id,
            true_is_initially_seen: !is_unseen,
        })?;
        if is_unseen {
            timeline.introduce(sample.class_id, index);
        }

        let top5 = topk_indices(prediction.probabilities.as_slice(), 5)
            .into_iter()
            .map(|i| (registry.entry(i).class_id, prediction.probabilities.as_slice()[i]))
            .collect();
        let registry_size = registry.len();

        let decision = selector.decide(sample, &prediction.probabilities, &registry, &mut budget)?;
        let oracle_result = if decision.selected {
            let result = oracle.query(sample.class_id, &mut registry, engine.as_mut(), index)?;
            if is_unseen {
                queries_on_unseen += 1;
            }
            if result.was_new {
                timeline.detect(sample.class_id, index)?;
            }
            Some(result)
        } else {
            None
        };

        engine.observe(sample, &prediction)?;

        events.push(RunEvent {
            index,
            true_class: sample.class_id,
            prediction: prediction.class_id,
            top5,
            registry_size,
            strategy: config.strategy.as_str().to_string(),
            uncertain: decision.uncertain,
            base_score: decision.base_score,
            background_ratio: decision.background_ratio,
            selected: decision.selected,
            denial_reason: decision.denial_reason,
            oracle: oracle_result,
        });
        if index % 10_000 == 0 {
            log::info!("{index}/{t} samples, registry {}", registry.len());
        }
    }

    let (acc_seen, acc_unseen) = accuracy.final_accuracies();
    let hm = match (acc_seen, acc_unseen) {
        (Some(a), Some(b)) => Some(harmonic_mean(a, b)),
        _ => None,
    };
    let icdd_value = icdd(&timeline)?;
    let no_unseen = timeline.total_unseen() == 0;
    if no_unseen {
        log::warn!("stream has no unseen-class samples; ICDD reported as 0");
    }
    let curves = if no_unseen {
        None
    } else {
        Some(build_curves(&timeline)?)
    };

    let name_of = |c: ClassId| ds.class(c).map(|e| e.name.clone()).unwrap_or_else(|| c.to_string());
    let mut detections: Vec<DetectionEntry> = timeline
        .detections
        .iter()
        .map(|(&c, &d)| DetectionEntry {
            class: name_of(c),
            class_id: c,
            introduced_at: timeline.introductions[&c],
            detected_at: d,
        })
        .collect();
    detections.sort_by_key(|d| (d.detected_at, d.class_id));
    let per_class_accuracy = accuracy
        .per_class()
        .iter()
        .map(|(&c, tally)| (name_of(c), 100.0 * tally.correct as f64 / tally.total as f64))
        .collect();

    let report = RunReport {
        acc_seen,
        acc_unseen,
        hm,
        icdd: icdd_value,
        icdd_pct: 100.0 * icdd_value,
        icdd_no_unseen: no_unseen,
        stream_length: t,
        unseen_classes: timeline.total_unseen(),
        queries_granted: budget.total_granted,
        queries_used: budget.total_consumed,
        queries_on_unseen,
        detections,
        per_class_accuracy,
        config_echo: config.echo(),
    };
    Ok(RunOutcome {
        report,
        events,
        curves,
        final_registry_size: registry.len(),
        final_budget: budget,
    })
}

/// Worker count for batch runs: `ITTA_THREADS` if set, else the machine's
/// available parallelism.
pub fn worker_threads() -> usize {
    std::env::var("ITTA_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Runs independent configs over one shared dataset on worker threads.
/// Results come back in input order.
pub fn run_batch(
    ds: &Dataset,
    stream: &StreamSpec,
    configs: &[RunConfig],
) -> Vec<Result<RunOutcome>> {
    let threads = worker_threads().min(configs.len()).max(1);
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<Result<RunOutcome>>>> =
        configs.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= configs.len() {
                    break;
                }
                let out = run_protocol(ds, stream, &configs[i]);
                *slots[i].lock().expect("slot lock") = Some(out);
            });
        }
    });
    slots
        .into_iter()
        .map(|s| s.into_inner().expect("slot lock").expect("every slot filled"))
        .collect()
}
