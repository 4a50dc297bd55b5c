use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

const ANCHOR: &str = "0.9553364891256060,0,0.2955202066613395";

fn vicinal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vicinal"))
        .args(args)
        .output()
        .expect("spawn vicinal")
}

fn vicinal_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_vicinal"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn vicinal");
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json_ok(args: &[&str]) -> Value {
    let out = vicinal(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("JSON output")
}

fn validator() -> jsonschema::Validator {
    let out = vicinal(&["schema"]);
    let schema: Value = serde_json::from_slice(&out.stdout).unwrap();
    jsonschema::validator_for(&schema).expect("valid schema")
}

fn dist(a: &Value, b: &[f64]) -> f64 {
    let a: Vec<f64> = a.as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let s2: f64 = a.iter().zip(b).map(|(x, y)| (x + y).powi(2)).sum();
    2.0 * d2.sqrt().atan2(s2.sqrt())
}

#[test]
fn example_check_has_no_violations() {
    let v = json_ok(&[
        "check",
        "--mapping",
        "example-3-2",
        "--property",
        "spherically-nonspreading",
        "--samples",
        "10000",
        "--seed",
        "7",
    ]);
    let report = &v["result"]["reports"][0];
    assert_eq!(report["violations"], 0);
    assert_eq!(report["samples"], 10000);
    assert_eq!(v["config"]["sampling"]["stratification"], "example32");
}

#[test]
fn ppa_finds_neg_cos_anchor() {
    let v = json_ok(&["ppa", "--functional", "neg-cos-dist", "--anchor", ANCHOR, "--x0", "p"]);
    let p: Vec<f64> = ANCHOR.split(',').map(|c| c.parse().unwrap()).collect();
    assert!(dist(&v["result"]["run"]["minimizer"], &p) < 1e-6);
}

#[test]
fn resolve_fixes_points_of_the_ball() {
    let x = "0.9950041652780258,0.09983341664682815,0";
    let v = json_ok(&[
        "resolve",
        "--functional",
        "indicator-ball",
        "--anchor",
        "p",
        "--radius",
        "0.3",
        "--point",
        x,
    ]);
    let coords: Vec<f64> = x.split(',').map(|c| c.parse().unwrap()).collect();
    assert!(dist(&v["result"]["point"], &coords) <= 1e-12);
}

#[test]
fn outputs_validate_against_schema() {
    let validator = validator();
    let runs: Vec<Vec<&str>> = vec![
        vec!["resolve", "--functional", "pull-to-point", "--anchor", ANCHOR],
        vec!["check", "--property", "comparison-inequality", "--samples", "200"],
        vec!["check", "--functional", "neg-cos-dist", "--anchor", ANCHOR, "--property", "vicinal,quasi-nonexpansive", "--samples", "100"],
        vec!["iterate", "--mapping", "example-3-2"],
        vec!["ppa", "--functional", "indicator-ball", "--radius", "0.2"],
        vec!["ppa", "--functional", "pull-to-point", "--anchor", ANCHOR, "--starts", "3"],
        vec!["center", "--functional", "neg-cos-dist", "--anchor", ANCHOR, "--max-iter", "60"],
        vec!["example-3-2", "--samples", "300"],
        vec!["g-function", "--functional", "neg-cos-dist", "--anchor", ANCHOR, "--samples", "100"],
    ];
    for args in runs {
        let v = json_ok(&args);
        let errors: Vec<String> = validator.iter_errors(&v).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{args:?}: {errors:?}");
        assert_eq!(v["schema_version"], "1");
        assert_eq!(v["command"], args[0]);
    }
    // a malformed envelope is rejected
    let mut bad = json_ok(&["example-3-2", "--samples", "30"]);
    bad["result"]["reports"][0]["violations"] = Value::from(-1);
    assert!(!validator.is_valid(&bad));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 3] = [
        &["check", "--functional", "pull-to-point", "--anchor", ANCHOR, "--property", "firmly-vicinal", "--samples", "500", "--seed", "3"],
        &["ppa", "--functional", "neg-cos-dist", "--anchor", ANCHOR, "--seed", "3"],
        &["iterate", "--functional", "pull-to-point", "--anchor", ANCHOR, "--format", "csv"],
    ];
    for (i, args) in runs.iter().enumerate() {
        // the output path is part of the echoed config, so reuse it
        let path = dir.path().join(format!("{i}.out"));
        let mut a = args.to_vec();
        a.extend(["--out", path.to_str().unwrap()]);
        let mut bytes = Vec::new();
        for _ in 0..2 {
            assert!(vicinal(&a).status.success());
            bytes.push(std::fs::read(&path).unwrap());
        }
        assert!(!bytes[0].is_empty());
        assert_eq!(bytes[0], bytes[1], "{args:?}");
    }
}

#[test]
fn csv_trace_columns() {
    let out = vicinal(&["iterate", "--mapping", "example-3-2", "--format", "csv", "--max-iter", "4"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    assert_eq!(lines.next().unwrap(), "n,step_dist,dist_to_ref,x0,x1,x2");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(first[0], "0");
    assert_eq!(first[1], "");
    assert!(text.starts_with("# schema_version=1\n# config={"));
}

#[test]
fn emitted_samples_csv() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("samples.csv");
    let out = vicinal(&[
        "check",
        "--mapping",
        "identity",
        "--property",
        "vicinal",
        "--samples",
        "10",
        "--emit-samples",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,y,lhs,rhs,residual");
    assert_eq!(lines.len(), 11);
}

#[test]
fn flags_override_config_which_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(
        &path,
        r#"{"mapping": {"kind": "identity"}, "property": "vicinal", "sampling": {"count": 17, "seed": 5}}"#,
    )
    .unwrap();
    let cfg = path.to_str().unwrap();
    let v = json_ok(&["check", "--config", cfg]);
    assert_eq!(v["config"]["sampling"]["count"], 17);
    assert_eq!(v["config"]["sampling"]["seed"], 5);
    assert_eq!(v["config"]["tolerances"]["tol"], 1e-9);
    let v = json_ok(&["check", "--config", cfg, "--seed", "9", "--tol", "1e-6"]);
    assert_eq!(v["config"]["sampling"]["count"], 17);
    assert_eq!(v["config"]["sampling"]["seed"], 9);
    assert_eq!(v["config"]["tolerances"]["tol"], 1e-6);
}

#[test]
fn echoed_config_reproduces_the_run() {
    let first = json_ok(&["ppa", "--functional", "pull-to-point", "--anchor", ANCHOR, "--seed", "11"]);
    let config = serde_json::to_string(&first["config"]).unwrap();
    let out = vicinal_stdin(&["ppa", "--config", "-"], &config);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let second: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(first, second);
}

fn error_record(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("JSON error record")
}

#[test]
fn exit_codes() {
    let out = vicinal(&["ppa", "--functional", "bogus"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_record(&out)["error"]["kind"], "invalid_config");

    let out = vicinal_stdin(&["check", "--config", "-"], r#"{"sampels": 3}"#);
    assert_eq!(out.status.code(), Some(2));

    let out = vicinal(&["resolve", "--functional", "pull-to-point", "--anchor", ANCHOR, "--max-iter", "2"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_record(&out)["error"]["exit_code"], 3);

    // the example mapping jumps across d(x, p) = π/8, so it is not firmly vicinal
    let args = ["check", "--mapping", "example-3-2", "--property", "firmly-vicinal", "--samples", "300"];
    let out = vicinal(&args);
    assert_eq!(out.status.code(), Some(0));
    let mut strict = args.to_vec();
    strict.push("--strict");
    let out = vicinal(&strict);
    assert_eq!(out.status.code(), Some(4));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["result"]["passed"], false);
}

#[test]
fn center_reads_points_files() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("points.csv");
    // two alternating points at ±0.2 rad around e0 in the (e0, e1) plane
    let (c, s) = (0.2f64.cos(), 0.2f64.sin());
    let mut text = String::from("x0,x1,x2\n");
    for k in 0..10 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        text.push_str(&format!("{c},{},0\n", sign * s));
    }
    std::fs::write(&csv, text).unwrap();
    let v = json_ok(&["center", "--points", csv.to_str().unwrap(), "--tail-start", "2"]);
    let est = &v["result"]["estimate"];
    assert!(dist(&est["center"], &[1.0, 0.0, 0.0]) < 1e-8);
    assert!((est["radius"].as_f64().unwrap() - 0.2).abs() < 1e-8);
}
