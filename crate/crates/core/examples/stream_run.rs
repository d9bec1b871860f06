//! Full protocol run with report, event log and curves written to disk.

use itta::active::Strategy;
use itta::dataset::{synth_generate, SynthConfig};
use itta::runner::{emit_report, run_protocol, OutputConfig, RunConfig};
use itta::tta::TtaKind;

fn main() -> itta::Result<()> {
    let synth = synth_generate(&SynthConfig::default())?;
    let out_dir = std::env::temp_dir().join("itta-stream-run");
    std::fs::create_dir_all(&out_dir)?;

    let config = RunConfig {
        strategy: Strategy::Segassist,
        tta: TtaKind::Tda,
        logit_scale: 20.0,
        output: OutputConfig {
            report: Some(out_dir.join("report.json")),
            events: Some(out_dir.join("events.jsonl")),
            curves: Some(out_dir.join("curves.csv")),
            curve_stride: 10,
        },
        ..RunConfig::default()
    };
    let outcome = run_protocol(&synth.dataset, &synth.stream, &config)?;
    let r = &outcome.report;
    println!(
        "acc seen {:?}  acc unseen {:?}  hm {:?}  icdd {:.2}%",
        r.acc_seen, r.acc_unseen, r.hm, r.icdd_pct
    );
    println!("queries {}/{} ({} on unseen)", r.queries_used, r.queries_granted, r.queries_on_unseen);
    for d in &r.detections {
        println!("  {} introduced at {} detected at {}", d.class, d.introduced_at, d.detected_at);
    }
    for path in emit_report(&outcome, &config.output)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
