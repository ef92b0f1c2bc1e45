use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn qmarg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qmarg")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> serde_json::Value {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let o = qmarg(&full);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn floats(v: &serde_json::Value) -> Vec<f64> {
    v.as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect()
}

#[test]
fn non_of_example_states() {
    let v = json(&["non", data("bd_example.json").to_str().unwrap()]);
    let lam = floats(&v["lambdas"]);
    for (x, y) in lam.iter().zip([0.9, 0.7, 0.6, 0.4, 0.3, 0.1]) {
        assert!((x - y).abs() < 1e-12, "{lam:?}");
    }
    let v = json(&["non", data("single_determinant.json").to_str().unwrap()]);
    assert_eq!(floats(&v["lambdas"]), vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0]);
}

#[test]
fn malformed_state_file_is_rejected() {
    let o = qmarg(&["non", data("malformed.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn gpc_examples() {
    let v = json(&["gpc", "--non", "1,1,1,0,0,0", "--setting", "3,6"]);
    assert_eq!(v["min_inequality_value"].as_f64(), Some(0.0));
    assert!(v["saturated"].as_array().unwrap().iter().any(|l| l == "bd-ineq"));

    let v = json(&["gpc", "--non", "1,1,0.5,0.5,0,0"]);
    assert!(!v["violations"].as_array().unwrap().is_empty());

    let v = json(&["gpc", "--non", "0.5,0.5,0.5,0.5,0.5,0.5"]);
    assert_eq!(v["min_inequality_value"].as_f64(), Some(0.5));
}

#[test]
fn selection_examples() {
    let count = |sat: &str| json(&["selection", "--setting", "3,6", "--saturated", sat])["ansatz"].as_array().unwrap().len();
    assert_eq!(count("bd-eq1,bd-eq2,bd-eq3"), 8);
    assert_eq!(count("bd-eq1,bd-eq2,bd-eq3,bd-ineq"), 3);
    assert_eq!(count("none"), 20);
}

#[test]
fn hersch_zwahlen_all_sequences_pass() {
    let v = json(&["--seed", "7", "hz", "--dim", "5", "--trials", "200"]);
    assert_eq!(v["all_passed"], true);
    assert_eq!(v["results"].as_array().unwrap().len(), 32);
}

#[test]
fn inequality_examples() {
    let v = json(&["ineq", "--da", "2", "--db", "2", "--pi", "10", "--sigma", "1100"]);
    assert_eq!(v["never_violated"], true);
    let v = json(&["ineq", "--pi", "10", "--sigma", "0001"]);
    assert_eq!(v["never_violated"], false);
    assert!(floats(&v["witness"]["lambda_ab"]).len() == 4);
}

#[test]
fn non_interacting_harmonium() {
    let v = json(&["harmonium", "--kappa", "0", "--n", "3", "--basis", "12"]);
    let p = &v["points"][0];
    assert!(p["d"].as_f64().unwrap().abs() < 1e-15);
    assert!(p["hf_dist"].as_f64().unwrap() < 1e-12);
}

#[test]
fn harmonium_csv_has_one_row_per_kappa() {
    let o = qmarg(&["harmonium", "--scan", "0.1:0.3:3", "--basis", "16"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "kappa,D,hf_dist,eps6,norm_deficit");
    assert_eq!(lines.len(), 4);
}

#[test]
fn invalid_input_exits_with_code_two() {
    assert_eq!(qmarg(&["gpc", "--non", "1,2,x"]).status.code(), Some(2));
    assert_eq!(qmarg(&["harmonium", "--scan", "0.1:0.9:3"]).status.code(), Some(2));
    assert_eq!(qmarg(&["ineq", "--pi", "12", "--sigma", "0001"]).status.code(), Some(2));
    assert_eq!(qmarg(&["bogus"]).status.code(), Some(2));
}

#[test]
fn precision_floor_exits_with_code_three() {
    let o = qmarg(&["harmonium", "--kappa", "0.005", "--basis", "16"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn output_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("qmarg-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("out.json");
    let args = ["--json", "gpc", "--non", "0.9,0.7,0.6,0.4,0.3,0.1"];
    let direct = qmarg(&args);
    let mut with_file = args.to_vec();
    with_file.extend(["--output", path.to_str().unwrap()]);
    assert_eq!(qmarg(&with_file).status.code(), Some(0));
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn repeated_runs_are_byte_identical() {
    let runs: [&[&str]; 3] = [
        &["--json", "--seed", "11", "ineq", "--pi", "10", "--sigma", "0011", "--samples", "400"],
        &["--seed", "3", "hz", "--dim", "4", "--trials", "30"],
        &["harmonium", "--scan", "0.1:0.2:2", "--basis", "14"],
    ];
    for args in runs {
        let a = qmarg(args);
        let b = qmarg(args);
        assert!(!a.stdout.is_empty());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}
