use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn write(name: &str, content: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, content).unwrap();
    path
}

fn pwlab(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_pwlab"))
        .args(args)
        .env_remove("PWLAB_TOL")
        .output()
        .unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

const SCALAR_B: &str = r#"{"kind":"a","n":2,"F":[[0,1],[-1,0]],"B":[[1,0],[0,1]]}"#;
const DIAG_B: &str = r#"{"kind":"a","n":2,"F":[[0,0],[0,0]],"B":[[1,0],[0,2]]}"#;

#[test]
fn confflat_payload() {
    let spec = write("scalarB.json", SCALAR_B);
    let (code, out, _) = pwlab(&["check-confflat", "--spec", spec.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(json(&out), json(r#"{"conformally_flat": true}"#));
    let spec = write("diagB.json", DIAG_B);
    let (_, out, _) = pwlab(&["check-confflat", "--spec", spec.to_str().unwrap()]);
    assert_eq!(json(&out), json(r#"{"conformally_flat": false}"#));
}

#[test]
fn non_skew_f_is_a_validation_error() {
    let spec = write("badF.json", r#"{"kind":"a","n":2,"F":[[0,1],[1,0]],"B":[[1,0],[0,1]]}"#);
    let (code, out, _) = pwlab(&["metric", "--spec", spec.to_str().unwrap(), "--point", "0,1,1,0"]);
    assert_eq!(code, 2);
    let v = json(&out);
    assert_eq!(v["error"]["kind"], "not_skew");
    assert!(v["error"]["residual"].as_f64().unwrap() > 1.0);
}

#[test]
fn malformed_json_is_a_validation_error() {
    let spec = write("broken.json", r#"{"kind":"c","n":1}"#);
    let (code, out, _) = pwlab(&["isom", "--spec", spec.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(json(&out)["error"]["kind"], "schema");
}

#[test]
fn unknown_subcommand_prints_usage() {
    let (code, out, err) = pwlab(&["frobnicate"]);
    assert_eq!(code, 64);
    assert!(out.is_empty());
    assert!(err.contains("Usage"));
}

#[test]
fn metric_example() {
    let spec = write("n1.json", r#"{"kind":"a","n":1,"F":[[0]],"B":[[1]]}"#);
    let (code, out, _) = pwlab(&["metric", "--spec", spec.to_str().unwrap(), "--point", "0,2,5"]);
    assert_eq!(code, 0);
    let g = &json(&out)["metric"];
    assert_eq!(g[2][2], 4.0);
    assert_eq!(g[0][2], 1.0);
    assert_eq!(g[1][1], 1.0);
}

#[test]
fn kind_b_outside_domain() {
    let spec = write("b1.json", r#"{"kind":"b","n":1,"F":[[0]],"B":[[1]]}"#);
    let (code, out, _) = pwlab(&["weyl", "--spec", spec.to_str().unwrap(), "--u", "-1"]);
    assert_eq!(code, 2);
    assert_eq!(json(&out)["error"]["kind"], "domain");
}

#[test]
fn isom_structure_constants() {
    let spec = write("diagB2.json", DIAG_B);
    let (code, out, _) = pwlab(&["isom", "--spec", spec.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["labels"].as_array().unwrap().len(), 6);
    assert!(v["jacobi_residual"].as_f64().unwrap() < 1e-12);
    for entry in v["nonzero"].as_array().unwrap() {
        assert_eq!(entry.as_array().unwrap().len(), 4);
    }
    let (code, out, _) = pwlab(&["conf", "--spec", spec.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["labels"].as_array().unwrap().len(), 7);
}

#[test]
fn classify_element_boost() {
    let m = write("boost.json", "[[-1,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,1]]");
    let (code, out, _) = pwlab(&["classify-element", "--matrix", m.to_str().unwrap(), "--n", "2"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["kind"], "hyperbolic");
    assert!((v["a"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    let (code, _, _) = pwlab(&["classify-element", "--matrix", m.to_str().unwrap(), "--n", "3"]);
    assert_eq!(code, 2);
}

#[test]
fn tolerance_flag_beats_environment() {
    let m = write("boost2.json", "[[-1,0,0,0],[0,0,0,0],[0,0,0,0],[0,0,0,1]]");
    let path = m.to_str().unwrap();
    let run = |env: &str, extra: &[&str]| {
        let mut args = vec!["classify-element", "--matrix", path, "--n", "2"];
        args.extend_from_slice(extra);
        Command::new(env!("CARGO_BIN_EXE_pwlab")).args(&args).env("PWLAB_TOL", env).output().unwrap()
    };
    assert_eq!(run("0.5", &[]).status.code(), Some(2));
    assert_eq!(run("0.5", &["--tol", "1e-9"]).status.code(), Some(0));
    assert_eq!(run("junk", &[]).status.code(), Some(2));
}

#[test]
fn cw_witnesses() {
    let b = write("cwB.json", "[[-1,0],[0,-4]]");
    let (code, out, _) = pwlab(&["cw", "bi-invariant", "--B", b.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["verdict"], "yes");
    assert!((v["C"][1][1].as_f64().unwrap() - 2.0).abs() < 1e-12);
    let b = write("cwNo.json", "[[1,0],[0,-1]]");
    let (code, out, _) = pwlab(&["cw", "left-invariant", "--B", b.to_str().unwrap(), "--draws", "2000"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["verdict"], "no");
    assert_eq!(v["search"]["verdict"], "no");
    assert!(v["certificate"].is_string());
}

#[test]
fn derivation_commands() {
    let d = write("deriv.json", r#"{"lambda":0,"omega":[[0,0],[0,0]],"L":[[1,0],[0,1]]}"#);
    let p = d.to_str().unwrap();
    let (code, out, _) = pwlab(&["from-derivation", "--data", p]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["spec"]["B"], json("[[-1.0,0.0],[0.0,-1.0]]"));
    let (code, out, _) = pwlab(&["normalize", "--data", p]);
    assert_eq!(code, 0);
    assert!(json(&out)["residuals"].as_array().unwrap().iter().all(|r| r["passed"] == true));
    let (code, out, _) = pwlab(&["nomizu", "--data", p]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["images"].as_array().unwrap().len(), 4);
    let bad = write("deriv_bad.json", r#"{"lambda":1,"omega":[[0,1],[-1,0]],"L":[[0,0],[0,0]]}"#);
    let (code, out, _) = pwlab(&["from-derivation", "--data", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(json(&out)["error"]["kind"], "constraint");
}

#[test]
fn prolongation_of_co() {
    let basis: Vec<Value> = pwlab_core::lie::co_basis(3).iter().map(pwlab_core::io::matrix_to_json).collect();
    let b = write("co3.json", &Value::Array(basis).to_string());
    let (code, out, _) = pwlab(&["prolong", "--basis", b.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["dimension"], 3);
    let rot = write("euclid_rot.json", "[[[0,1,0],[-1,0,0],[0,0,0]]]");
    let (code, out, _) = pwlab(&["prolong", "--basis", rot.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert_eq!(json(&out)["error"]["kind"], "constraint");
}

#[test]
fn output_is_deterministic_and_report_goes_to_stderr() {
    let spec = write("det.json", DIAG_B);
    let p = spec.to_str().unwrap();
    let (_, a, _) = pwlab(&["curvature", "--spec", p, "--point", "0.5,1,-1,0.3", "--report"]);
    let (_, b, err) = pwlab(&["curvature", "--spec", p, "--point", "0.5,1,-1,0.3", "--report"]);
    assert_eq!(a, b);
    let report: Value = json(err.lines().last().unwrap());
    assert_eq!(report["input_sha256"][p].as_str().unwrap().len(), 64);
}

#[test]
fn verify_subset() {
    let (code, out, err) = pwlab(&["verify", "--suite", "4,prolongation", "--seed", "7"]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["passed"], true);
    assert_eq!(v["checks"].as_array().unwrap().len(), 2);
    assert_eq!(err.lines().filter(|l| l.starts_with("[PASS]")).count(), 2);
    let (code, out, _) = pwlab(&["verify", "--suite", "11"]);
    assert_eq!(code, 2);
    assert_eq!(json(&out)["error"]["kind"], "invalid_parameter");
}
