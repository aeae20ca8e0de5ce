use serde_json::Value;
use std::f64::consts::{LN_2, PI};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn mixlog(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mixlog")).args(args).output().expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

const SHEAR: &str = r#"
horizon = 2.0
sample_dt = 0.1

[grid]
d = 2
n = 128

[flow]
name = "shear"

[initial]
pattern = "cosine"

[diagnostics]
geometric = false
"#;

const RANDOM: &str = r#"
seed = 5
horizon = 0.3
sample_dt = 0.1

[grid]
d = 2
n = 32

[flow]
name = "random"
interval = 0.1

[initial]
pattern = "random"
max_mode = 4

[diagnostics]
hs = [0.5]
dvdt_check = true
"#;

#[test]
fn constants_output() {
    let out = mixlog(&["constants", "--d", "2"]);
    assert!(out.status.success());
    let v = json_stdout(&out);
    assert!((v["alpha"].as_f64().unwrap() - 1.0 / (2.0 * PI)).abs() < 1e-15);
    assert!((v["c_d"].as_f64().unwrap() - 1.0 / PI).abs() < 1e-15);
    let v = json_stdout(&mixlog(&["constants", "--d", "1"]));
    assert_eq!(v["sigma"].as_f64(), Some(2.0));
    assert_eq!(mixlog(&["constants", "--d", "3"]).status.code(), Some(2));
    assert_eq!(mixlog(&["constants", "--d", "two"]).status.code(), Some(2));
}

#[test]
fn verify_suites() {
    let out = mixlog(&["verify", "--suite", "zeta"]);
    assert!(out.status.success());
    let v = json_stdout(&out);
    assert_eq!(v["passed"], Value::Bool(true));
    let checks = v["suites"][0]["checks"].as_array().unwrap();
    let z2 = checks.iter().find(|c| c["name"] == "zeta_d2").unwrap();
    assert!(z2["value"].as_f64().unwrap() <= 1e-8);
    let out = mixlog(&["verify", "--suite", "jensen"]);
    assert!(out.status.success());
    assert_eq!(mixlog(&["verify", "--suite", "nonsense"]).status.code(), Some(2));
}

#[test]
fn minimal_run_has_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "min.toml", &SHEAR.replace("horizon = 2.0", "horizon = 0.0"));
    let out_dir = dir.path().join("run");
    let out = mixlog(&["simulate", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(out_dir.join("series.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert_eq!(fs::read_dir(out_dir.join("snapshots")).unwrap().count(), 1);
}

#[test]
fn shear_slope_within_calibrated_rate() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "shear.toml", SHEAR);
    let out_dir = dir.path().join("run");
    let out = mixlog(&["simulate", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let s: Value = serde_json::from_str(&fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["v_slope_bound"]["holds"], Value::Bool(true));
    assert_eq!(s["calibration"]["v"]["envelope_holds"], Value::Bool(true));
    assert_eq!(s["calibration"]["sqrt_w"]["envelope_holds"], Value::Bool(true));
    assert_eq!(s["certificates"][0]["all_samples_pass"], Value::Bool(true));
    assert!(s["l2_relative_drift"].as_f64().unwrap() < 1e-8);

    let diag = dir.path().join("diag.csv");
    let out = mixlog(&["diagnostics", out_dir.to_str().unwrap(), "--s", "-0.5", "--out", diag.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let col = |text: &str, i: usize| -> Vec<String> { text.lines().skip(1).map(|l| l.split(',').nth(i).unwrap().to_string()).collect() };
    let series = fs::read_to_string(out_dir.join("series.csv")).unwrap();
    let recomputed = fs::read_to_string(&diag).unwrap();
    assert!(recomputed.starts_with("t,l2,v,w,hminus1,eps_geom,cum_grad_p,h_s=-0.5\n"));
    for i in [0, 2, 3, 6] {
        assert_eq!(col(&series, i), col(&recomputed, i));
    }
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "random.toml", RANDOM);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for d in [&a, &b] {
        let out = mixlog(&["simulate", "--config", &cfg, "--out", d.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let read = |d: &Path, f: &str| fs::read(d.join(f)).unwrap();
    assert_eq!(read(&a, "series.csv"), read(&b, "series.csv"));
    assert_eq!(read(&a, "summary.json"), read(&b, "summary.json"));
    let c = dir.path().join("c");
    assert!(mixlog(&["simulate", "--config", &cfg, "--out", c.to_str().unwrap(), "--seed", "6"]).status.success());
    assert_ne!(read(&a, "series.csv"), read(&c, "series.csv"));
    let header = String::from_utf8(read(&a, "series.csv")).unwrap();
    assert!(header.starts_with("t,l2,v,w,hminus1,eps_geom,cum_grad_p,h_s=0.5,dvdt_gap\n"));
}

#[test]
fn config_errors_are_usage_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), "bad.toml", &SHEAR.replace("name = \"shear\"", "name = \"vortex\""));
    let out = mixlog(&["simulate", "--config", &bad, "--out", dir.path().join("x").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 10:"));
    let unseeded = write_config(dir.path(), "unseeded.toml", &RANDOM.replace("seed = 5", ""));
    let out = mixlog(&["simulate", "--config", &unseeded, "--out", dir.path().join("y").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(mixlog(&["simulate"]).status.code(), Some(2));
}

#[test]
fn sharpness_slopes() {
    let out = mixlog(&["sharpness", "--m", "2", "--n-max", "8", "--n", "1024"]);
    assert!(out.status.success());
    let v = json_stdout(&out);
    assert!((v["slope"].as_f64().unwrap() - 2.0 * LN_2).abs() < 1e-9);
    assert_eq!(v["rows"].as_array().unwrap().len(), 9);

    let v = json_stdout(&mixlog(&["sharpness", "--n-max", "0", "--n", "64"]));
    assert!(v["slope"].is_null());
    assert!(v["notice"].is_string());

    // Mean 1.5: the fit sees ||theta_0 - mean||^2 = 2, not ||theta_0||^2 = 4.25.
    let v = json_stdout(&mixlog(&["sharpness", "--n-max", "4", "--n", "128", "--d", "1", "--offset", "1.5"]));
    assert!((v["slope"].as_f64().unwrap() - 2.0 * LN_2).abs() < 1e-9);

    assert_eq!(mixlog(&["sharpness", "--n-max", "8", "--n", "64"]).status.code(), Some(2));
}
