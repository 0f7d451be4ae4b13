use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn pform(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pform")).args(args).output().expect("binary runs")
}

fn load(name: &str) -> Value {
    serde_json::from_str(&std::fs::read_to_string(config(name)).unwrap()).unwrap()
}

fn write(dir: &Path, name: &str, v: &Value) -> String {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(v).unwrap()).unwrap();
    path.to_str().unwrap().to_owned()
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn charge_reports_the_worked_example() {
    let out = pform(&["charge", config("radiation_d4_p1.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let v = stdout_json(&out);
    let value = v.pointer("/charges/electric/value/0").and_then(Value::as_f64).expect(&text);
    assert!((value - 8.0 * std::f64::consts::PI * 1.5).abs() < 1e-10);
}

#[test]
fn charge_output_is_deterministic() {
    let path = config("radiation_d6_p2.json");
    let a = pform(&["charge", path.to_str().unwrap()]);
    let b = pform(&["charge", path.to_str().unwrap()]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn verify_passes_on_sample_configs() {
    for name in ["radiation_d4_p1.json", "radiation_d6_p2.json", "coulomb_d6_p1.json"] {
        let out = pform(&["verify", config(name).to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", String::from_utf8_lossy(&out.stdout));
        assert_eq!(stdout_json(&out)["passed"], Value::Bool(true));
    }
}

#[test]
fn broken_hodge_sign_fails_verification() {
    let out = pform(&["verify", "--break-hodge-sign", config("radiation_d6_p2.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let v = stdout_json(&out);
    let failed: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == Value::Bool(false))
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, vec!["hodgeSquared"]);
}

/// `radiation_d6_p2.json` with a `u`-dependent subleading gauge parameter.
fn moving_gauge(dir: &Path) -> String {
    let mut v = load("radiation_d6_p2.json");
    let term = serde_json::json!({
        "lTimes2": 2, "m": 0,
        "uPoly": [{ "uPower": 1, "monomials": [{ "coeff": [0.5, 0.0], "exps": [[0, 1], [1, 0], [0, 0], [0, 0]] }] }]
    });
    v["gaugeParameter"][0]["terms"].as_array_mut().unwrap().push(term);
    write(dir, "moving.json", &v)
}

fn stokes_check(out: &Output) -> Value {
    let v = stdout_json(out);
    v["checks"].as_array().unwrap().iter().find(|c| c["name"] == "stokes").unwrap().clone()
}

#[test]
fn truncated_stokes_leaves_a_residual() {
    let dir = tempfile::tempdir().unwrap();
    let path = moving_gauge(dir.path());
    let full = pform(&["verify", &path]);
    assert_eq!(full.status.code(), Some(0));
    let check = stokes_check(&full);
    assert!(check["detail"]["deltaQ"].as_f64().unwrap() > 1e-3);
    assert!(check["residual"].as_f64().unwrap() < 1e-12);

    let cut = pform(&["verify", "--stokes-truncate=-2", &path]);
    assert_eq!(cut.status.code(), Some(1));
    let check = stokes_check(&cut);
    assert_eq!(check["passed"], Value::Bool(false));
    assert!(check["residual"].as_f64().unwrap() > 1e-8);
}

#[test]
fn falloff_violation_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = load("coulomb_d6_p1.json");
    v["components"][0]["terms"][0]["lTimes2"] = Value::from(4);
    let path = write(dir.path(), "slow.json", &v);
    let out = pform(&["charge", &path]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).expect("JSON error on stderr");
    assert!(err.to_string().contains("falloff") || err.to_string().contains("Falloff"), "{err}");
}

#[test]
fn malformed_inputs_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut bad_label = load("radiation_d4_p1.json");
    bad_label["components"][0]["indices"] = serde_json::json!(["x"]);
    let mut repeated = load("radiation_d6_p2.json");
    repeated["components"][0]["indices"] = serde_json::json!(["th1", "th1"]);
    let mut version = load("radiation_d4_p1.json");
    version["schemaVersion"] = Value::from(2);
    let mut unknown = load("radiation_d4_p1.json");
    unknown["extra"] = Value::from(1);
    for (name, v) in [("label", bad_label), ("repeat", repeated), ("version", version), ("unknown", unknown)] {
        let path = write(dir.path(), &format!("{name}.json"), &v);
        let out = pform(&["charge", &path]);
        assert_eq!(out.status.code(), Some(2), "{name}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(pform(&["charge", "/nonexistent/config.json"]).status.code(), Some(2));
    assert_eq!(pform(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(pform(&["sweep", "--d-min", "9", "--d-max", "4"]).status.code(), Some(2));
}

#[test]
fn sweep_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = pform(&["sweep", "--d-min", "4", "--d-max", "6", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let mut reader = csv::Reader::from_path(&path).unwrap();
    let headers = reader.headers().unwrap().clone();
    assert_eq!(headers.get(0), Some("D"));
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 4);
    let d4 = &rows[0];
    assert_eq!((d4.get(5), d4.get(8)), (Some("WellDefined"), Some("rotation")));
}
