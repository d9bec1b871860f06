mod common;

use itta::active::Strategy;
use itta::dataset::{Dataset, StreamSpec, SynthConfig};
use itta::runner::{
    concat_datasets, emit_report, read_report, run_batch, run_protocol, OutputConfig, RunConfig,
    RunEvent,
};
use itta::tta::TtaKind;
use itta::IttaError;

fn small() -> SynthConfig {
    SynthConfig {
        d: 16,
        num_seen: 8,
        num_unseen: 4,
        samples_per_class: 20,
        patch_h: 3,
        patch_w: 3,
        seed: 7,
        ..SynthConfig::default()
    }
}

fn cfg(strategy: Strategy) -> RunConfig {
    RunConfig {
        strategy,
        logit_scale: common::SYNTH_LOGIT_SCALE,
        budget_rate: 0.1,
        budget_window: 20,
        ..RunConfig::default()
    }
}

#[test]
fn all_seen_stream_reports_no_unseen() {
    let s = common::synth(&SynthConfig {
        noise_sigma: 0.0,
        text_align: 0.99,
        ..small()
    });
    let mut stream = s.stream.clone();
    stream.seen_class_ids.append(&mut stream.unseen_class_ids);
    stream.seen_class_ids.sort();
    let out = run_protocol(&s.dataset, &stream, &cfg(Strategy::Msp)).unwrap();
    assert_eq!(out.report.acc_seen, Some(100.0));
    assert_eq!(out.report.acc_unseen, None);
    assert_eq!(out.report.hm, None);
    assert_eq!(out.report.icdd, 0.0);
    assert!(out.report.icdd_no_unseen);
    assert!(out.curves.is_none());
    assert!(out.report.detections.is_empty());
}

#[test]
fn budget_that_rounds_to_zero_is_rejected() {
    let s = common::synth(&small());
    let c = RunConfig {
        budget_rate: 0.0005,
        budget_window: 1000,
        ..cfg(Strategy::Msp)
    };
    assert!(matches!(
        run_protocol(&s.dataset, &s.stream, &c),
        Err(IttaError::Config(_))
    ));
}

#[test]
fn empty_stream_is_an_error() {
    let s = common::synth(&small());
    let ds = Dataset::from_parts(s.dataset.classes.clone(), s.dataset.background.clone(), vec![])
        .unwrap();
    let stream = StreamSpec {
        seed: 0,
        seen_class_ids: s.stream.seen_class_ids.clone(),
        unseen_class_ids: s.stream.unseen_class_ids.clone(),
        order: vec![],
    };
    assert!(matches!(
        run_protocol(&ds, &stream, &cfg(Strategy::Msp)),
        Err(IttaError::EmptyStream)
    ));
}

#[test]
fn segassist_without_patches_is_rejected() {
    let s = common::synth(&small());
    let mut ds = s.dataset.clone();
    for x in &mut ds.samples {
        x.patches = None;
    }
    let ds = Dataset::from_parts(ds.classes, ds.background, ds.samples).unwrap();
    assert!(run_protocol(&ds, &s.stream, &cfg(Strategy::Segassist)).is_err());
}

fn check_invariants(events: &[RunEvent], initial: usize, total_classes: usize) {
    let mut prev = initial;
    for (i, e) in events.iter().enumerate() {
        assert_eq!(e.index, i + 1);
        assert!(e.registry_size >= prev && e.registry_size <= total_classes);
        prev = e.registry_size;
        assert_eq!(e.selected, e.oracle.is_some());
        assert_eq!(e.selected, e.denial_reason.is_none());
        if let Some(o) = &e.oracle {
            assert_eq!(o.true_class_id, e.true_class);
            assert_eq!(o.was_new, o.detection_index == Some(e.index));
        }
    }
}

#[test]
fn every_strategy_keeps_bookkeeping_consistent() {
    let s = common::synth(&small());
    for strategy in [
        Strategy::Random,
        Strategy::Msp,
        Strategy::Entropy,
        Strategy::Margin,
        Strategy::Segassist,
    ] {
        for tta in [TtaKind::Zseval, TtaKind::Tda] {
            let c = RunConfig { tta, ..cfg(strategy) };
            let out = run_protocol(&s.dataset, &s.stream, &c).unwrap();
            check_invariants(&out.events, 8, 12);
            let oracle_calls = out.events.iter().filter(|e| e.oracle.is_some()).count() as u64;
            assert_eq!(out.report.queries_used, oracle_calls);
            assert_eq!(out.final_budget.total_consumed, oracle_calls);
            assert!(out.report.queries_used <= out.report.queries_granted);
            assert!(out.report.queries_on_unseen <= out.report.queries_used);
            let new = out
                .events
                .iter()
                .filter(|e| e.oracle.as_ref().is_some_and(|o| o.was_new))
                .count();
            assert_eq!(new, out.report.detections.len());
            assert_eq!(out.final_registry_size, 8 + new);
            assert_eq!(out.report.unseen_classes, 4);
            assert_eq!(out.report.stream_length, 240);
        }
    }
}

#[test]
fn runs_are_deterministic() {
    let s = common::synth(&small());
    for strategy in [Strategy::Random, Strategy::Segassist] {
        let c = RunConfig {
            tta: TtaKind::Tda,
            seed: 3,
            ..cfg(strategy)
        };
        let a = run_protocol(&s.dataset, &s.stream, &c).unwrap();
        let b = run_protocol(&s.dataset, &s.stream, &c).unwrap();
        assert_eq!(a.events, b.events);
        assert_eq!(a.report, b.report);
    }
}

#[test]
fn prediction_precedes_the_query_that_expands_the_registry() {
    let s = common::synth(&small());
    let out = run_protocol(&s.dataset, &s.stream, &cfg(Strategy::Random)).unwrap();
    let first_new = out
        .events
        .iter()
        .find(|e| e.oracle.as_ref().is_some_and(|o| o.was_new))
        .expect("at least one detection");
    // the sample that triggers the expansion was classified without its class
    assert_ne!(first_new.prediction, first_new.true_class);
    assert!(first_new.top5.iter().all(|(c, _)| *c != first_new.true_class));
}

#[test]
fn batch_matches_sequential() {
    let s = common::synth(&small());
    let configs: Vec<RunConfig> = [Strategy::Msp, Strategy::Entropy, Strategy::Segassist]
        .into_iter()
        .map(cfg)
        .collect();
    let batch = run_batch(&s.dataset, &s.stream, &configs);
    for (c, b) in configs.iter().zip(batch) {
        let one = run_protocol(&s.dataset, &s.stream, c).unwrap();
        assert_eq!(one.events, b.unwrap().events);
    }
}

#[test]
fn emitted_report_round_trips() {
    let s = common::synth(&small());
    let out = run_protocol(&s.dataset, &s.stream, &cfg(Strategy::Segassist)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let paths = OutputConfig {
        report: Some(dir.path().join("r.json")),
        events: Some(dir.path().join("e.jsonl")),
        curves: Some(dir.path().join("c.csv")),
        curve_stride: 7,
    };
    assert_eq!(emit_report(&out, &paths).unwrap().len(), 3);
    assert_eq!(read_report(paths.report.as_ref().unwrap()).unwrap(), out.report);

    let lines = std::fs::read_to_string(paths.events.as_ref().unwrap()).unwrap();
    let parsed: Vec<RunEvent> = lines.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(parsed, out.events);

    let csv = std::fs::read_to_string(paths.curves.as_ref().unwrap()).unwrap();
    let mut rows = csv.lines();
    assert_eq!(rows.next(), Some("index,t_norm,n_gt,n_det"));
    let last = rows.last().unwrap();
    assert!(last.starts_with("240,1,"));
}

#[test]
fn zero_detections_serialize_as_empty_array() {
    let s = common::synth(&small());
    let c = RunConfig {
        tau_msp: 0.0,
        ..cfg(Strategy::Msp)
    };
    let out = run_protocol(&s.dataset, &s.stream, &c).unwrap();
    assert_eq!(out.report.queries_used, 0);
    let v = serde_json::to_value(&out.report).unwrap();
    assert_eq!(v["detections"], serde_json::json!([]));
    // with nothing detected each class contributes T - intro + 1 gap steps
    let mut intro = std::collections::BTreeMap::new();
    for e in &out.events {
        if s.stream.unseen_class_ids.contains(&e.true_class) {
            intro.entry(e.true_class).or_insert(e.index);
        }
    }
    let gap: usize = intro.values().map(|&i| 240 - i + 1).sum();
    let expected = gap as f64 / (intro.len() as f64 * 240.0);
    assert!((out.report.icdd - expected).abs() < 1e-12);
}

#[test]
fn concatenated_files_share_classes_by_name() {
    let a = common::synth(&small()).dataset;
    let b = common::synth(&small()).dataset;
    let n = a.len();
    let merged = concat_datasets(a.clone(), b).unwrap();
    assert_eq!(merged.classes, a.classes);
    assert_eq!(merged.len(), 2 * n);
    assert_eq!(merged.samples[n..], a.samples[..]);

    let other = common::synth(&SynthConfig { seed: 8, ..small() }).dataset;
    assert!(concat_datasets(a, other).is_err());
}
