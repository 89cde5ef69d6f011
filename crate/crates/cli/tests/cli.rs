use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

use unidet::detectors::locc::locc_detector;
use unidet::detectors::weyl::weyl_unitary;
use unidet::estimation::estimate;
use unidet::operator::random_density;

fn unidet(args: &[&str], stdin: Option<&str>) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_unidet"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    let mut pipe = child.stdin.take().unwrap();
    pipe.write_all(stdin.unwrap_or("").as_bytes()).unwrap();
    drop(pipe);
    child.wait_with_output().unwrap()
}

fn with_config(args: &[&str], config: &str) -> Output {
    let mut all = args.to_vec();
    all.extend(["--config", "-"]);
    unidet(&all, Some(config))
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn validate_weyl_d3_passes() {
    let o = unidet(&["validate", "--detector", "weyl:d=3", "--seed", "1"], None);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn validate_with_mixed_ancilla_reports_rank_one() {
    let o = with_config(
        &["validate"],
        r#"{"detector": "weyl:d=2", "ancilla": "mixed", "seed": 1}"#,
    );
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(
        text.contains("FAIL  universality") && text.contains("rank 1 of 4"),
        "{text}"
    );
}

#[test]
fn validate_continuous_detector() {
    let o = unidet(
        &["validate", "--detector", "su2:j=1/2:grid=12x8x8", "--seed", "2"],
        None,
    );
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let o = unidet(&["validate", "--detector", "sud:d=2", "--seed", "2"], None);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn usage_errors_exit_with_two() {
    let o = unidet(&["validate", "--detector", "weyl:q=3", "--seed", "1"], None);
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
    let o = unidet(&["validate", "--detector", "weyl:d=3"], None);
    assert_eq!(o.status.code(), Some(2), "missing seed");
    let o = with_config(
        &["estimate"],
        r#"{"detector": "weyl:d=2", "seed": 1, "n": 10, "bogus": 1}"#,
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
    let o = unidet(&["estimate", "--config", "/nonexistent/config.json"], None);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn estimate_pauli_z_on_basis_state() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = with_config(
        &["estimate", "--out", out],
        r#"{"detector": "weyl:d=2", "state": "basis:0", "observable": "pauli:Z", "n": 100000, "seed": 3}"#,
    );
    assert_eq!(o.status.code(), Some(0));
    let v = read_json(&dir.path().join("estimate.json"));
    let est = v["report"]["estimate"]["re"].as_f64().unwrap();
    let se = v["report"]["stderr"].as_f64().unwrap();
    assert!((est - 1.0).abs() < 4.0 * se, "{est} ± {se}");
    let csv = fs::read_to_string(dir.path().join("estimate.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
}

#[test]
fn identity_observable_has_zero_stderr() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = with_config(
        &["estimate", "--out", out, "--format", "json"],
        r#"{"detector": "weyl:d=3", "state": "random:rank=2:seed=4", "observable": "identity", "n": 1000, "seed": 3}"#,
    );
    assert_eq!(o.status.code(), Some(0));
    let v = read_json(&dir.path().join("estimate.json"));
    assert!(v["report"]["stderr"].as_f64().unwrap() < 1e-12);
    assert!(!dir.path().join("estimate.csv").exists());
}

#[test]
fn cli_matches_library_for_non_hermitian_locc() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = with_config(
        &["estimate", "--out", out],
        r#"{"detector": "locc:d=3", "state": "random:rank=3:seed=8", "observable": "weyl:1,2", "n": 50000, "seed": 21}"#,
    );
    assert_eq!(o.status.code(), Some(0));
    let v = read_json(&dir.path().join("estimate.json"));
    let r = &v["report"];
    let (re, im) = (
        r["estimate"]["re"].as_f64().unwrap(),
        r["estimate"]["im"].as_f64().unwrap(),
    );
    let (xr, xi) = (r["exact"]["re"].as_f64().unwrap(), r["exact"]["im"].as_f64().unwrap());
    assert!((re - xr).abs() < 4.0 * r["stderr_re"].as_f64().unwrap());
    assert!((im - xi).abs() < 4.0 * r["stderr_im"].as_f64().unwrap());

    let lib = estimate(
        &locc_detector(3).unwrap(),
        &random_density(3, 3, 8).unwrap(),
        &weyl_unitary(3, 1, 2).unwrap(),
        50000,
        21,
    )
    .unwrap();
    assert_eq!(re, lib.estimate.re);
    assert_eq!(im, lib.estimate.im);
    assert_eq!(r["stderr"].as_f64().unwrap(), lib.stderr);
}

#[test]
fn scan_writes_one_row_per_size() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = with_config(
        &["scan", "--out", out],
        r#"{"detector": "weyl:d=2", "state": "random:rank=1:seed=2", "observable": "pauli:X", "schedule": [100, 10000, 1000000], "seed": 5}"#,
    );
    assert_eq!(o.status.code(), Some(0));
    let mut rdr = csv::Reader::from_path(dir.path().join("scan.csv")).unwrap();
    let n_col = rdr.headers().unwrap().iter().position(|h| h == "n").unwrap();
    let ns: Vec<String> = rdr.records().map(|r| r.unwrap()[n_col].to_string()).collect();
    assert_eq!(ns, ["100", "10000", "1000000"]);
    let v = read_json(&dir.path().join("scan.json"));
    let se: Vec<f64> = v["reports"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["stderr"].as_f64().unwrap())
        .collect();
    assert!(se[0] > se[1] && se[1] > se[2], "{se:?}");
    let summary = fs::read_to_string(dir.path().join("scan_summary.txt")).unwrap();
    assert!(summary.contains("log-log slope"));
}

#[test]
fn single_point_scan_matches_estimate_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"detector": "sud:d=2", "state": "random:rank=2:seed=6", "observable": "pauli:Y", "n": 3000, "seed": 9, "format": "csv"}"#;
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(with_config(&["estimate", "--out", a.to_str().unwrap()], cfg)
        .status
        .success());
    assert!(with_config(&["scan", "--out", b.to_str().unwrap()], cfg)
        .status
        .success());
    let est = fs::read_to_string(a.join("estimate.csv")).unwrap();
    let scan = fs::read_to_string(b.join("scan.csv")).unwrap();
    assert_eq!(est, scan);
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = r#"{"detector": "weyl:d=2", "state": "basis:1", "observable": "pauli:X", "n": 500, "seed": 1}"#;
    let run = |seed: &str, name: &str| {
        let out = dir.path().join(name);
        let o = with_config(
            &["estimate", "--seed", seed, "--n", "800", "--out", out.to_str().unwrap()],
            cfg,
        );
        assert!(o.status.success());
        read_json(&out.join("estimate.json"))
    };
    let v = run("2", "x");
    assert_eq!(v["report"]["seed"], 2);
    assert_eq!(v["report"]["samples"], 800);
    assert_ne!(run("3", "y")["report"]["estimate"], v["report"]["estimate"]);
}
