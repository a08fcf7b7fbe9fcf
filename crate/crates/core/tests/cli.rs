//! The `dtnet` binary end to end: exit statuses, artifacts, reproducibility.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dtnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dtnet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn synth_train(out: &Path) -> Output {
    dtnet(&[
        "train",
        "--dataset-format",
        "synth",
        "--classes",
        "3",
        "--dims",
        "6",
        "--samples-per-class",
        "25",
        "--seed",
        "4",
        "--method",
        "2",
        "--eta-layer",
        "0.01",
        "--lmax",
        "3",
        "--out",
        out.to_str().unwrap(),
    ])
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn train_writes_reproducible_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let run = synth_train(&a);
    assert!(run.status.success(), "{}", stderr(&run));
    assert!(synth_train(&b).status.success());
    for name in ["model.dtn", "report.json", "summary.txt"] {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name} differs between reruns"
        );
    }
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(a.join("report.json")).unwrap()).unwrap();
    for key in ["architecture", "layers", "selection", "hyper", "train_accuracy"] {
        assert!(report.get(key).is_some(), "report lacks {key}");
    }
    assert!(report["hyper"]["eta_layer"].as_f64() == Some(0.01));
    assert!(stdout(&run).contains("architecture"));
}

#[test]
fn eval_on_train_part_matches_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m");
    assert!(synth_train(&out).status.success());
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("report.json")).unwrap()).unwrap();
    let logged = report["train_accuracy"].as_f64().unwrap();
    let model = out.join("model.dtn");
    let eval = dtnet(&[
        "eval",
        "--model",
        model.to_str().unwrap(),
        "--dataset-format",
        "synth",
        "--classes",
        "3",
        "--dims",
        "6",
        "--samples-per-class",
        "25",
        "--seed",
        "4",
        "--part",
        "train",
    ]);
    assert!(eval.status.success(), "{}", stderr(&eval));
    let text = stdout(&eval);
    assert!(text.contains(&format!("accuracy {logged:.2} %")), "{text}");
    assert!(text.contains("confusion"));
}

#[test]
fn corrupted_model_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m");
    assert!(synth_train(&out).status.success());
    let model = out.join("model.dtn");
    let mut bytes = fs::read(&model).unwrap();
    let last = bytes.len() - 3;
    bytes[last] ^= 0x20;
    fs::write(&model, bytes).unwrap();
    let eval = dtnet(&[
        "eval",
        "--model",
        model.to_str().unwrap(),
        "--dataset-format",
        "synth",
    ]);
    assert_eq!(eval.status.code(), Some(2));
    assert!(stderr(&eval).contains("checksum"), "{}", stderr(&eval));
}

#[test]
fn missing_dataset_exits_with_usage_status() {
    let out = dtnet(&["train", "--train", "/nonexistent/vowel.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("/nonexistent/vowel.csv"));
}

#[test]
fn bad_flags_exit_with_usage_status() {
    assert_eq!(dtnet(&["train", "--method", "7"]).status.code(), Some(2));
    assert_eq!(dtnet(&["bench", "--sizes", "3"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    fs::write(&cfg, r#"{"hyper": {"gamma": 0.8, "colour": 1}}"#).unwrap();
    let out = dtnet(&["train", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("colour"));
}

#[test]
fn bench_prints_one_row_per_pair() {
    let out = dtnet(&["bench", "--kinds", "dct,db4", "--sizes", "8,13", "--reps", "3"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().count(), 5, "{text}");
    assert!(text.contains("MAD"));
}
