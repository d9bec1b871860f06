use std::path::Path;
use std::process::{Command, Output};

fn itta(args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_itta"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn itta");
    assert!(
        out.status.success(),
        "itta {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SYNTH: &str = r#"{"d": 16, "num_seen": 8, "num_unseen": 4, "samples_per_class": 15,
                        "patch_h": 3, "patch_w": 3, "seed": 11}"#;

#[test]
fn synth_split_run_compare() {
    let dir = tempfile::tempdir().unwrap();
    let p = |name: &str| dir.path().join(name);
    std::fs::write(p("synth.json"), SYNTH).unwrap();

    itta(&["synth", "--config", s(&p("synth.json")), "--out", s(&p("d.ittb"))]);
    assert!(p("d.stream.json").exists());
    itta(&["split", "--dataset", s(&p("d.ittb")), "--unseen-ratio", "0.5", "--seed", "4",
           "--out", s(&p("split.json"))]);
    let split: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p("split.json")).unwrap()).unwrap();
    assert_eq!(split["unseen_class_ids"].as_array().unwrap().len(), 4);

    let run = |tag: &str, strategy: &str| {
        itta(&[
            "run", "--dataset", s(&p("d.ittb")), "--stream", s(&p("d.stream.json")),
            "--strategy", strategy, "--tta", "tda", "--logit-scale", "20",
            "--budget-rate", "0.1", "--budget-window", "20", "--seed", "5",
            "--out", s(&p(&format!("{tag}.json"))),
            "--events", s(&p(&format!("{tag}.jsonl"))),
            "--curves", s(&p(&format!("{tag}.csv"))),
        ]);
    };
    run("a", "segassist");
    run("b", "segassist");
    run("c", "msp");
    for ext in ["json", "jsonl", "csv"] {
        let a = std::fs::read(p(&format!("a.{ext}"))).unwrap();
        let b = std::fs::read(p(&format!("b.{ext}"))).unwrap();
        assert_eq!(a, b, "repeat run differs in .{ext}");
    }

    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p("a.json")).unwrap()).unwrap();
    for key in ["acc_seen", "acc_unseen", "hm", "icdd", "icdd_pct", "detections", "config_echo"] {
        assert!(report.get(key).is_some(), "report lacks {key}");
    }
    assert_eq!(report["config_echo"]["strategy"], "segassist");

    let table = itta(&["compare", s(&p("a.json")), s(&p("c.json")), "--csv"]);
    let text = String::from_utf8(table.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().next().unwrap().contains("hm"));
}

#[test]
fn run_without_report_path_prints_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("synth.json");
    let ds = dir.path().join("d.ittb");
    std::fs::write(&cfg, SYNTH).unwrap();
    itta(&["synth", "--config", s(&cfg), "--out", s(&ds)]);
    let out = itta(&["run", "--dataset", s(&ds), "--strategy", "random", "--budget-rate", "0.1",
                     "--budget-window", "20"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["stream_length"], 180);
}

#[test]
fn bad_input_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.ittb");
    std::fs::write(&junk, b"NOPE").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_itta"))
        .args(["run", "--dataset", s(&junk)])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("magic"));

    let one = Command::new(env!("CARGO_BIN_EXE_itta"))
        .args(["compare", s(&junk)])
        .output()
        .unwrap();
    assert!(!one.status.success());
}
