use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

fn spec(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("specs").join(format!("{name}.json"))
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let p = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    fs::write(&p, contents).unwrap();
    p
}

fn avgop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_avgop")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

#[test]
fn analyze_prints_json_with_the_rule_trace() {
    let o = avgop(&["analyze", spec("two_subspaces_pi_over_4").to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["results"]["kind"], "analyze");
    assert_eq!(v["results"]["modulus"]["trace"][0]["rule"], "two_subspace_modulus");
    assert_eq!(v["request"]["command"], "analyze");
    let c = std::f64::consts::FRAC_PI_4.cos();
    let upper = v["results"]["modulus"]["upper"].as_f64().unwrap();
    assert!((upper - (1.0 + c) / (2.0 + c)).abs() <= 1e-12, "{upper}");
}

#[test]
fn iterate_csv_lists_the_douglas_rachford_orbit() {
    let o = avgop(&["iterate", spec("dr_line_slab").to_str().unwrap(), "--csv"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(
        &rows[1..],
        &[
            "0,4.0000000000000000e0,1.0000000000000000e1",
            "1,-1.0000000000000000e0,7.0000000000000000e0",
            "2,-2.0000000000000000e0,3.0000000000000000e0",
            "3,-5.0000000000000000e-1,5.0000000000000000e-1",
            "4,0.0000000000000000e0,0.0000000000000000e0",
        ]
    );
}

#[test]
fn out_flag_writes_the_report_to_a_file() {
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("estimate_report.json");
    let o = avgop(&[
        "estimate",
        spec("matrix_diag_three_quarters").to_str().unwrap(),
        "--seed",
        "7",
        "--samples",
        "2000",
        "--refine",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["request"]["params"]["seed"], 7);
    assert_eq!(v["request"]["params"]["refine"], 100);
    assert!(v["results"]["estimate"]["value"].as_f64().unwrap() <= 0.75 + 1e-9);
}

#[test]
fn malformed_documents_exit_with_two() {
    let bad_json = scratch("bad_syntax.json", "{\"schema\": 1, ");
    let o = avgop(&["analyze", bad_json.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let bad_field = scratch(
        "bad_field.json",
        r#"{"schema": 1, "operator": {"op": "relaxation", "lambda": 0.5, "inner": {"op": "matrix", "data": 3}}}"#,
    );
    let o = avgop(&["analyze", bad_field.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("operator.inner"));
    let o = avgop(&["teleport", spec("huber_prox").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn invalid_inputs_exit_with_three() {
    let expansive = scratch("expansive.json", r#"{"schema": 1, "operator": {"op": "matrix", "data": [[2]]}}"#);
    let o = avgop(&["analyze", expansive.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    let short = scratch(
        "short_start.json",
        r#"{"schema": 1, "operator": {"op": "identity", "dim": 2}, "x0": [1]}"#,
    );
    assert_eq!(code(&avgop(&["iterate", short.to_str().unwrap()])), 3);
    assert_eq!(code(&avgop(&["estimate", spec("huber_prox").to_str().unwrap(), "--samples", "0"])), 3);
}

#[test]
fn numerical_failures_exit_with_four() {
    let rotation = scratch(
        "rotation_inverse.json",
        r#"{"schema": 1, "operator": {"op": "matrix", "data": [[0, -1], [1, 0]]}, "v": [1, 0]}"#,
    );
    let o = avgop(&["invert", rotation.to_str().unwrap()]);
    assert_eq!(code(&o), 4, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn missing_files_exit_with_one() {
    assert_eq!(code(&avgop(&["analyze", "/nonexistent/spec.json"])), 1);
}
