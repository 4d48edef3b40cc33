use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn catalog(file: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("catalog").join(file).display().to_string()
}

fn lcsg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lcsg")).args(args).output().expect("binary runs")
}

fn report(args: &[&str]) -> (i32, Value) {
    let mut all = args.to_vec();
    all.extend(["--json", "-"]);
    let out = lcsg(&all);
    let v = serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)));
    (out.status.code().unwrap(), v)
}

fn failing_tags(v: &Value) -> Vec<String> {
    v["entries"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|e| e["verdict"] == "fail")
        .map(|e| e["paper_tag"].as_str().unwrap().to_string())
        .collect()
}

#[test]
fn pair_symplectic_lcs_groupoid_passes() {
    let (code, v) = report(&["run", &catalog("pair_symplectic.geo"), "--suite", "lcs-groupoid"]);
    assert_eq!(code, 0);
    assert_eq!(v["suite"], "lcs-groupoid");
    assert_eq!(v["seed"], 0xD1CE);
    assert_eq!(v["samples"], 64);
    assert_eq!(v["tolerance"], 1e-8);
    assert_eq!(v["elapsed_ms"], 0);
}

#[test]
fn contact_cotangent_construction_passes() {
    let out = lcsg(&["run", &catalog("contact_cotangent.geo"), "--suite", "prop-3-1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn broken_omega_fails_on_omega_multiplicativity() {
    let (code, v) = report(&["run", &catalog("broken_omega.geo"), "--suite", "lcs-groupoid"]);
    assert_eq!(code, 1);
    let tags = failing_tags(&v);
    assert!(tags.iter().any(|t| t.contains("Eq.14")), "{tags:?}");
}

#[test]
fn pass_fail_pattern_matches_golden_file() {
    let golden = include_str!("golden/lcs_groupoid_pattern.txt");
    let mut lines = Vec::new();
    for item in ["pair_symplectic", "broken_omega", "broken_lee", "broken_sigma"] {
        let (_, v) = report(&["run", item, "--suite", "lcs-groupoid"]);
        for e in v["entries"].as_array().unwrap() {
            lines.push(format!(
                "{} {} {}",
                e["id"].as_str().unwrap(),
                e["paper_tag"].as_str().unwrap(),
                e["verdict"].as_str().unwrap()
            ));
        }
    }
    assert_eq!(lines, golden.lines().collect::<Vec<_>>());
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = (0..2).map(|i| dir.path().join(format!("r{i}.json"))).collect();
    for p in &paths {
        let out = lcsg(&["run", "pair_lcs", "--suite", "full", "--seed", "7", "--samples", "16", "--json", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());
}

#[test]
fn seed_flag_changes_samples_not_verdicts() {
    let (c1, a) = report(&["run", "pair_lcs", "--suite", "lcs-groupoid", "--seed", "0x1"]);
    let (c2, b) = report(&["run", "pair_lcs", "--suite", "lcs-groupoid", "--seed", "2"]);
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a["seed"], 1);
    assert_eq!(b["seed"], 2);
}

#[test]
fn definition_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.geo");
    std::fs::write(&bad, "[chart M]\nvars = x, y\n[form w]\nchart = M\nvalue = x + * y\n").unwrap();
    let out = lcsg(&["run", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let out = lcsg(&["run", &catalog("pair_symplectic.geo"), "--suite", "no-such-suite"]);
    assert_eq!(out.status.code(), Some(2));

    let out = lcsg(&["run", "does_not_exist.geo"]);
    assert_eq!(out.status.code(), Some(2));

    let out = lcsg(&["run", "pair_symplectic", "--tol", "abc"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn fail_fast_reports_a_failure() {
    let (code, v) = report(&["run", "broken_sigma", "--suite", "full", "--fail-fast"]);
    assert_eq!(code, 1);
    assert!(!failing_tags(&v).is_empty());
}

#[test]
fn catalog_listing() {
    let out = lcsg(&["catalog"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    for id in ["pair_symplectic", "cotangent_additive", "contact_to_lcs"] {
        assert!(text.contains(id), "{text}");
    }
    let out = lcsg(&["catalog", "--show", "pair_lcs"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("[groupoid pair]"));
    let out = lcsg(&["suites"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("theorem-4-6"));
}

#[test]
fn timing_flag_records_elapsed_time() {
    let (code, v) = report(&["run", "pair_symplectic", "--suite", "structure", "--timing"]);
    assert_eq!(code, 0);
    assert!(v["elapsed_ms"].is_u64());
}
