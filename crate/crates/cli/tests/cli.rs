use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn xqual(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xqual"))
        .args(args)
        .current_dir(cwd)
        .env_remove("XQUAL_OUT_DIR")
        .output()
        .expect("run xqual")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

/// Temp dir with a small synthetic corpus under `data/`.
fn workspace(n_docs: usize) -> TempDir {
    let dir = TempDir::new().unwrap();
    let o = xqual(&["synth", "--dir", "data", "--n-docs", &n_docs.to_string(), "--seed", "3"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    dir
}

fn write_config(dir: &Path, cfg: &Value) -> String {
    fs::write(dir.join("cfg.json"), serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    "cfg.json".into()
}

fn base_config(models: Value, attributions: Value) -> Value {
    json!({
        "train": "data/train.tsv",
        "test": "data/test.tsv",
        "output_dir": "out",
        "seed": 11,
        "models": models,
        "attributions": attributions,
        "metrics": {"lipschitz_docs": 4, "infidelity_docs": 4, "m": 5, "n_draws": 10,
                    "lime": {"n_samples": 100}, "shap": {"n_samples": 64}}
    })
}

#[test]
fn train_lr_reports_auc_and_is_reproducible() {
    let ws = workspace(800);
    let cfg = write_config(ws.path(), &base_config(json!([{"id": "lr", "kind": "linear"}]), json!([])));
    let o = xqual(&["train", "--config", &cfg], ws.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let line = stdout(&o).lines().find(|l| l.starts_with("lr")).unwrap().to_string();
    let auc: f64 = line.split_whitespace().last().unwrap().parse().unwrap();
    assert!(auc >= 0.95, "auc {auc}");
    let model = ws.path().join("out/models/lr.json");
    let first = fs::read(&model).unwrap();
    let o = xqual(&["train", "--config", &cfg], ws.path());
    assert!(o.status.success());
    assert_eq!(first, fs::read(&model).unwrap());
    let summary: Value = serde_json::from_slice(&fs::read(ws.path().join("out/auc.json")).unwrap()).unwrap();
    assert_eq!(summary["models"].as_array().unwrap().len(), 1);
}

#[test]
fn missing_corpus_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &base_config(json!([{"id": "lr", "kind": "linear"}]), json!([])));
    let o = xqual(&["train", "--config", &cfg], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn unknown_config_key_is_rejected() {
    let ws = workspace(200);
    let mut cfg = base_config(json!([{"id": "lr", "kind": "linear"}]), json!([]));
    cfg["metrics"]["epsilon"] = json!(0.3);
    let cfg = write_config(ws.path(), &cfg);
    let o = xqual(&["train", "--config", &cfg], ws.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("epsilon"), "{}", stderr(&o));
}

#[test]
fn zero_workers_is_rejected() {
    let dir = TempDir::new().unwrap();
    let o = xqual(&["--workers", "0", "synth", "--dir", "d"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn incompatible_method_names_the_pair() {
    let ws = workspace(200);
    let cfg = write_config(
        ws.path(),
        &base_config(
            json!([{"id": "rf", "kind": "forest", "params": {"n_trees": 5}}]),
            json!([{"model": "rf", "methods": ["saliency"]}]),
        ),
    );
    let o = xqual(&["train", "--config", &cfg], ws.path());
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("rf") && err.contains("saliency"), "{err}");
}

#[test]
fn evaluate_lr_emits_six_distributions() {
    let ws = workspace(400);
    let cfg = write_config(
        ws.path(),
        &base_config(
            json!([{"id": "lr", "kind": "linear"}]),
            json!([{"model": "lr", "methods": ["truth", "shap", "lime"]}]),
        ),
    );
    assert!(xqual(&["train", "--config", &cfg], ws.path()).status.success());
    let o = xqual(&["evaluate", "--config", &cfg], ws.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(ws.path().join("out/evaluation/evaluation.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("model,method,metric,doc_id,value"));
    let mut groups: Vec<(String, String)> = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert!(f[4].parse::<f64>().unwrap().is_finite());
            (f[1].to_string(), f[2].to_string())
        })
        .collect();
    groups.sort();
    groups.dedup();
    assert_eq!(groups.len(), 6, "{groups:?}");
    for f in ["lipschitz.svg", "infidelity.svg", "evaluation.json"] {
        assert!(ws.path().join("out/evaluation").join(f).is_file(), "{f}");
    }

    let o = xqual(&["frontier", "--config", &cfg], ws.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(ws.path().join("out/frontier/frontier.svg").is_file());
}

fn frontier_labels(report: &Value) -> Vec<String> {
    let mut v: Vec<String> = report["pareto"]["optimal"]
        .as_array()
        .unwrap()
        .iter()
        .map(|p| format!("{} {}", p["model_id"].as_str().unwrap(), p["method"].as_str().unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn frontier_from_table2_points() {
    let dir = TempDir::new().unwrap();
    let points = fixture("table2.json");
    let o = xqual(
        &["--out", "res", "frontier", "--points", points.to_str().unwrap()],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let report: Value = serde_json::from_slice(&fs::read(dir.path().join("res/frontier/frontier.json")).unwrap()).unwrap();
    assert_eq!(frontier_labels(&report), ["BigBird IG", "LR SHAP", "RF SHAP"]);
    let lr_truth = report["pareto"]["dominated"]
        .as_array()
        .unwrap()
        .iter()
        .find(|d| d["point"]["model_id"] == "LR" && d["point"]["method"] == "Truth")
        .unwrap();
    assert_eq!(lr_truth["witness"]["method"], "SHAP");
    assert_eq!(lr_truth["witness"]["model_id"], "LR");
    assert!(stdout(&o).contains("weighted ranking"));
    assert!(dir.path().join("res/frontier/frontier.svg").is_file());
}

#[test]
fn frontier_single_point_and_infeasible_constraint() {
    let ws = workspace(200);
    let pts = json!([{"model_id": "m", "method": "shap", "auc": 0.7, "infidelity": 0.01, "lipschitz": 1.0}]);
    fs::write(ws.path().join("one.json"), pts.to_string()).unwrap();
    let o = xqual(&["--out", "a", "frontier", "--points", "one.json"], ws.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let report: Value = serde_json::from_slice(&fs::read(ws.path().join("a/frontier/frontier.json")).unwrap()).unwrap();
    assert_eq!(frontier_labels(&report), ["m shap"]);
    assert_eq!(report["ranking"]["ranked"][0]["rank"], 1);

    let mut cfg = base_config(json!([{"id": "lr", "kind": "linear"}]), json!([]));
    cfg["frontier"] = json!({"constraints": [{"field": "auc", "min": 0.99}]});
    let cfg = write_config(ws.path(), &cfg);
    let table2 = fixture("table2.json");
    let o = xqual(
        &["--out", "b", "frontier", "--config", &cfg, "--points", table2.to_str().unwrap()],
        ws.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("no candidate satisfies"), "{}", stdout(&o));
    let report: Value = serde_json::from_slice(&fs::read(ws.path().join("b/frontier/frontier.json")).unwrap()).unwrap();
    assert_eq!(report["ranking"]["excluded"].as_array().unwrap().len(), 9);
}

#[test]
fn perturb_with_zero_rate_copies_the_document() {
    let ws = workspace(200);
    let mut cfg = base_config(json!([{"id": "lr", "kind": "linear"}]), json!([]));
    cfg["metrics"]["pi"] = json!(0.0);
    let cfg = write_config(ws.path(), &cfg);
    let o = xqual(&["perturb", "--config", &cfg, "--doc-id", "train-1", "-n", "4"], ws.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let original: String = fs::read_to_string(ws.path().join("data/train.tsv"))
        .unwrap()
        .lines()
        .next()
        .unwrap()
        .split_once('\t')
        .unwrap()
        .1
        .to_string();
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 4);
    for (i, l) in lines.iter().enumerate() {
        let f: Vec<&str> = l.split('\t').collect();
        assert_eq!(f[0], i.to_string());
        assert_eq!(f[1], "");
        let expected: Vec<String> = original
            .split_whitespace()
            .map(|w| if w.chars().all(|c| c.is_ascii_digit()) { "numbertoken".into() } else { w.to_string() })
            .collect();
        assert_eq!(f[2], expected.join(" "));
    }

    let o = xqual(&["perturb", "--config", &cfg, "--doc-id", "nope", "-n", "1"], ws.path());
    assert!(!o.status.success());
}

#[test]
fn perturb_replacements_are_reported() {
    let ws = workspace(200);
    let mut cfg = base_config(json!([{"id": "lr", "kind": "linear"}]), json!([]));
    cfg["metrics"]["pi"] = json!(0.5);
    let cfg = write_config(ws.path(), &cfg);
    let o = xqual(&["perturb", "--config", &cfg, "--doc-id", "test-2", "-n", "3"], ws.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 3);
    assert!(out.lines().all(|l| !l.split('\t').nth(1).unwrap().is_empty()));
    let again = xqual(&["perturb", "--config", &cfg, "--doc-id", "test-2", "-n", "3"], ws.path());
    assert_eq!(out, stdout(&again));
}

#[test]
fn adapter_check_reports_handshake() {
    let script = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/adapter.py");
    let dir = TempDir::new().unwrap();
    let o = xqual(
        &["adapter-check", "--dim", "3", "python3", script.to_str().unwrap()],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(stdout(&o).trim()).unwrap();
    assert_eq!(v["name"], "ref-logistic");
    assert_eq!(v["representation"], "sparse-vector");
    assert_eq!(v["probe_probability"], 0.5);

    let o = xqual(
        &["adapter-check", "--timeout-secs", "5", "python3", script.to_str().unwrap(), "--mode", "garbage"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("this is not json"), "{}", stderr(&o));
}
