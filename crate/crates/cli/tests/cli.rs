use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn spatialign(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spatialign")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = spatialign(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn read_json(path: PathBuf) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn files(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(d).unwrap() {
            let path = e.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push((path.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&path).unwrap()));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn gen_is_byte_identical_across_runs() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        ok(&["gen", "--n", "12", "--mode", "flip", "--seed", "7", "--out", p(d.path())]);
    }
    let (fa, fb) = (files(a.path()), files(b.path()));
    assert!(fa.len() > 12);
    assert_eq!(fa, fb);

    let c = tempfile::tempdir().unwrap();
    ok(&["gen", "--n", "12", "--mode", "flip", "--seed", "8", "--out", p(c.path())]);
    assert_ne!(files(c.path()), fa);
}

#[test]
fn echoed_config_reproduces_gen() {
    let a = tempfile::tempdir().unwrap();
    ok(&["gen", "--n", "6", "--mode", "rotation", "--seed", "3", "--snr-db", "20", "--out", p(a.path())]);
    let b = tempfile::tempdir().unwrap();
    let cfg = a.path().join("config.json");
    ok(&["gen", "--config", p(&cfg), "--out", p(b.path())]);
    assert_eq!(files(a.path()), files(b.path()));
}

#[test]
fn empty_training_split_is_a_structured_error() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("manifest.json");
    std::fs::write(&manifest, r#"{"version":1,"entries":[]}"#).unwrap();
    let out = spatialign(&["train", "--manifest", p(&manifest), "--out", p(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["kind"], "empty_split");
    assert!(err["error"].as_str().unwrap().contains("empty split"));
}

#[test]
fn bad_arguments_exit_two_with_json() {
    let out = spatialign(&["gen", "--n", "many"]);
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["kind"], "usage");

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("config.json");
    std::fs::write(&cfg, r#"{"format_version":99}"#).unwrap();
    let out = spatialign(&["gen", "--config", p(&cfg), "--out", p(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stereo_pipeline_end_to_end() {
    let root = tempfile::tempdir().unwrap();
    let data = root.path().join("data");
    let run = root.path().join("run");
    let cfg = root.path().join("small.json");
    std::fs::write(&cfg, r#"{"hyper":{"epochs":3}}"#).unwrap();
    ok(&["gen", "--n", "40", "--mode", "flip", "--seed", "2", "--out", p(&data)]);
    let manifest = data.join("manifest.json");

    ok(&["train", "--config", p(&cfg), "--manifest", p(&manifest), "--out", p(&run)]);
    let ckpt = run.join("checkpoint.json");
    let report = read_json(run.join("train_report.json"));
    assert!(report.is_object());

    let eval_dir = run.join("eval");
    ok(&["eval", "--checkpoint", p(&ckpt), "--manifest", p(&manifest), "--out", p(&eval_dir)]);
    let eval = read_json(eval_dir.join("eval.json"));
    let acc = eval["accuracy"]["test"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&acc));

    let wav = data.join("audio").read_dir().unwrap().next().unwrap().unwrap().path();
    ok(&["doa", "--input", p(&wav), "--out", p(&run.join("doa"))]);
    ok(&["upmix", "--manifest", p(&manifest), "--out", p(&run.join("upmix"))]);
    ok(&["separate", "--manifest", p(&manifest), "--out", p(&run.join("separate"))]);
    ok(&["report", "--run-dir", p(&run)]);
    let summary = std::fs::read_to_string(run.join("summary.csv")).unwrap();
    assert!(summary.lines().count() > 3, "{summary}");
}

#[test]
fn foa_pipeline_end_to_end() {
    let root = tempfile::tempdir().unwrap();
    let data = root.path().join("data");
    let run = root.path().join("run");
    let cfg = root.path().join("small.json");
    std::fs::write(&cfg, r#"{"hyper":{"epochs":3}}"#).unwrap();
    ok(&["gen", "--n", "40", "--mode", "rotation", "--seed", "4", "--out", p(&data)]);
    let manifest = data.join("manifest.json");
    ok(&["train", "--config", p(&cfg), "--manifest", p(&manifest), "--out", p(&run)]);
    let ckpt = run.join("checkpoint.json");

    let analysis = run.join("analyze");
    ok(&["analyze", "--checkpoint", p(&ckpt), "--manifest", p(&manifest), "--split", "train", "--out", p(&analysis)]);
    let a = read_json(analysis.join("analyze.json"));
    assert!(a["spearman"].as_f64().unwrap().abs() <= 1.0);

    let m = read_json(manifest);
    let entry = m["entries"].as_array().unwrap().iter().find(|e| e["label"]["aligned"] == true).unwrap();
    let (wav, traj) = (data.join(entry["audio_path"].as_str().unwrap()), data.join(entry["trajectory_path"].as_str().unwrap()));
    let align = run.join("align");
    ok(&[
        "align", "--input", p(&wav), "--trajectory", p(&traj), "--checkpoint", p(&ckpt), "--truth-deg", "0", "--out",
        p(&align),
    ]);
    let est = read_json(align.join("align.json"));
    assert!(est["error_deg"].as_f64().unwrap() <= 180.0);
}

#[test]
fn clean_stereo_flip_is_learned_through_the_cli() {
    let root = tempfile::tempdir().unwrap();
    let (data, run) = (root.path().join("data"), root.path().join("run"));
    ok(&["gen", "--n", "2000", "--mode", "flip", "--seed", "7", "--out", p(&data)]);
    let manifest = data.join("manifest.json");
    ok(&["train", "--manifest", p(&manifest), "--out", p(&run)]);
    ok(&["eval", "--checkpoint", p(&run.join("checkpoint.json")), "--manifest", p(&manifest), "--out", p(&run)]);
    let acc = read_json(run.join("eval.json"))["accuracy"]["test"].as_f64().unwrap();
    assert!(acc >= 0.95, "test accuracy {acc}");
}
