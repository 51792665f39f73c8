use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn splitlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_splitlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn sweep_writes_json_and_csv_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"scheme":"strang","n_qubits":2,"t":1.0,"K":[8,16,32,64],"seed":3}"#,
    );
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out_dir = dir.path().join(run);
        let out = splitlab(&["sweep", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        outputs.push((
            fs::read(out_dir.join("sweep.json")).unwrap(),
            fs::read(out_dir.join("points.csv")).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
    let csv = String::from_utf8(outputs[0].1.clone()).unwrap();
    assert!(csv.starts_with("K,N,error\n8,17,"));
    let result: serde_json::Value = serde_json::from_slice(&outputs[0].0).unwrap();
    assert!((result["slope"].as_f64().unwrap() + 2.0).abs() < 0.15);
}

#[test]
fn simulate_prints_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "cfg.json",
        r#"{"scheme":"alg2","d":4,"m":3,"t":0.5,"K":[2,4],"seed":1}"#,
    );
    let out = splitlab(&["simulate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["points"].as_array().unwrap().len(), 2);
    assert_eq!(report["points"][0]["panel_errors"].as_array().unwrap().len(), 16);
}

#[test]
fn bound_check_and_lemma2() {
    let out = splitlab(&["bound-check", "--instances", "40", "--seed", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["violations"].as_array().unwrap().len(), 0);

    let out = splitlab(&["verify-lemma2", "--n", "3", "--grid", "40"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["N"], 3);
    assert!((r["max_s"].as_f64().unwrap() - 8.0 / 27.0).abs() < 1e-4);
}

#[test]
fn expand_reports_series_and_audit() {
    let dir = tempfile::tempdir().unwrap();
    let word = write(dir.path(), "w.json", r#"{"steps":[[1,0.05],[2,0.1],[1,0.05]]}"#);
    let out = splitlab(&["expand", "--word", &word, "--pair", "1,2", "--dt-unit", "0.1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = json(&out);
    assert_eq!(r["audit"]["verdict"], "obstructed");
    assert!((r["audit"]["s"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    let coeffs = r["series"]["coeffs"].as_array().unwrap();
    assert_eq!(coeffs[0]["word"], serde_json::json!([]));
    let aba = coeffs
        .iter()
        .find(|c| c["word"] == serde_json::json!([1, 2, 1]))
        .unwrap();
    assert!((aba["im"].as_f64().unwrap() - 0.25).abs() < 1e-12);

    let out = splitlab(&["expand", "--word", &word, "--pair", "1,2"]);
    assert_eq!(json(&out)["audit"]["verdict"], "mistimed");
}

#[test]
fn invalid_input_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(
        dir.path(),
        "bad.json",
        r#"{"scheme":"strang","n_qubits":2,"t":1.0,"K":[16,8],"seed":3}"#,
    );
    assert_eq!(splitlab(&["simulate", "--config", &bad]).status.code(), Some(2));
    assert_eq!(splitlab(&["verify-lemma2", "--n", "2"]).status.code(), Some(2));
    assert_eq!(
        splitlab(&["simulate", "--config", "/nonexistent.json"]).status.code(),
        Some(2)
    );
    let word = write(dir.path(), "w.json", r#"{"steps":[[1,0.5]]}"#);
    assert_eq!(
        splitlab(&["expand", "--word", &word, "--pair", "1,2"]).status.code(),
        Some(2)
    );
    assert_eq!(
        splitlab(&["expand", "--word", &word, "--pair", "1,1"]).status.code(),
        Some(2)
    );
}

#[test]
fn scaling_runs_a_small_grid() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "scaling.json",
        r#"{"schemes":["strang"],"second_order_t":[4.0,8.0,16.0],"second_order_eps":[1e-3,1e-4,1e-5]}"#,
    );
    let out = splitlab(&["scaling", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(json(&out)["fits"].as_array().unwrap().len(), 2);
}
