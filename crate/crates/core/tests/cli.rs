use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.json"))
}

fn warpmech(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_warpmech")).args(args).output().expect("binary runs")
}

fn run_in(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec![sub, "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    warpmech(&args)
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn check<'a>(r: &'a Value, name: &str) -> &'a Value {
    r["checks"].as_array().unwrap().iter().find(|c| c["name"] == name).unwrap_or_else(|| panic!("no check {name}"))
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("scenario.json");
    std::fs::write(&path, body).unwrap();
    path
}

const SMALL: &str = r#"{
    "name": "small",
    "model": {"kind": "alcubierre_limit", "profile": {"kind": "constant", "v0": 0.5}},
    "initial_state": {"q": [0.0, 0.0, 0.0, 0.0], "p": [1.0, 0.2, 0.3, 0.1]},
    "integrator": {"method": "implicit_midpoint", "dt": 0.01},
    "t_span": [0.0, 0.02],
    "branch": {"kind": "alcubierre", "branch": "wb", "vs": 0.5, "q_s": 0.0},
    "monitors": ["H", "tr1"],
    "samples": 5
}"#;

#[test]
fn known_good_alcubierre_scenario_exits_zero() {
    let out = tempfile::tempdir().unwrap();
    let o = run_in("check-all", &scenario("alcubierre-constant-vs"), out.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(out.path());
    assert_eq!(r["all_pass"], true);
    for name in ["hamiltonian_contract", "torsion_action", "torsion_original", "energy_drift", "trace_drift"] {
        let c = check(&r, name);
        assert_eq!(c["pass"], true, "{name}");
        assert!(c["anchor"].as_str().unwrap().len() > 5);
    }
    assert!(r["trajectory"]["drift"]["H"]["relative"].as_f64().unwrap() < 1e-8);
    for f in ["trajectory.csv", "master.csv"] {
        assert!(out.path().join(f).exists(), "{f}");
    }
}

#[test]
fn known_good_godel_scenario_exits_zero() {
    let out = tempfile::tempdir().unwrap();
    let o = run_in("check-all", &scenario("godel-approx"), out.path(), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(out.path());
    assert!(r["not_applicable"].as_array().unwrap().iter().any(|n| n["name"] == "pushforward"));
}

#[test]
fn negative_dt_exits_two_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("\"dt\": 0.01", "\"dt\": -0.01"));
    let o = run_in("integrate", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("integrator.dt"));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn schema_and_argument_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("\"samples\": 5", "\"samples\": 5, \"colour\": 1"));
    let o = run_in("integrate", &cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));

    let good = write_config(dir.path(), SMALL);
    assert_eq!(run_in("integrate", &good, dir.path(), &["--tol-scale", "-1"]).status.code(), Some(2));
    assert_eq!(run_in("fly", &good, dir.path(), &[]).status.code(), Some(2));
    assert_eq!(run_in("integrate", &dir.path().join("missing.json"), dir.path(), &[]).status.code(), Some(2));
}

#[test]
fn unreachable_torsion_tolerance_exits_one() {
    let out = tempfile::tempdir().unwrap();
    let o = run_in("check-torsion", &scenario("torsion-unreachable"), out.path(), &[]);
    assert_eq!(o.status.code(), Some(1));
    let r = report(out.path());
    let c = check(&r, "torsion_original");
    assert_eq!(c["pass"], false);
    assert_eq!(c["tolerance"], 1e-30);
    assert_eq!(r["all_pass"], false);
}

#[test]
fn printed_forms_are_opt_in_and_fail() {
    let out = tempfile::tempdir().unwrap();
    assert_eq!(run_in("check-all", &scenario("printed-forms"), out.path(), &[]).status.code(), Some(1));
    let r = report(out.path());
    for name in ["printed_blocks_alcubierre", "printed_trace_alcubierre", "hierarchy_bracket_printed", "bi_hamiltonian_printed"] {
        assert_eq!(check(&r, name)["pass"], false, "{name}");
    }
    for name in ["pullback_closed_form", "hierarchy_bracket", "bi_hamiltonian"] {
        assert_eq!(check(&r, name)["pass"], true, "{name}");
    }
    let good = tempfile::tempdir().unwrap();
    run_in("check-all", &scenario("alcubierre-constant-vs"), good.path(), &[]);
    let names: Vec<String> = report(good.path())["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap().to_string()).collect();
    assert!(!names.iter().any(|n| n.contains("printed")));
}

#[test]
fn tol_scale_tightens_tolerances() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    assert_eq!(run_in("check-torsion", &cfg, dir.path(), &[]).status.code(), Some(0));
    assert_eq!(run_in("check-torsion", &cfg, dir.path(), &["--tol-scale", "1e-30"]).status.code(), Some(1));
    assert_eq!(report(dir.path())["tol_scale"], 1e-30);
}

#[test]
fn trajectory_csv_shape() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    assert_eq!(run_in("integrate", &cfg, dir.path(), &[]).status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], "t,q1,q2,q3,q4,p1,p2,p3,p4,H,tr1");
    assert!(lines.iter().all(|l| l.split(',').count() == 11));
}

#[test]
fn same_seed_same_bytes_and_seed_override_matters() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let read = |sub: &str, seed: &str| {
        let out = dir.path().join(format!("{sub}-{seed}"));
        assert_eq!(run_in("check-all", &cfg, &out, &["--seed", seed]).status.code(), Some(0));
        (std::fs::read(out.join("report.json")).unwrap(), std::fs::read(out.join("trajectory.csv")).unwrap())
    };
    let a = read("a", "11");
    let b = read("b", "11");
    let c = read("c", "12");
    assert_eq!(a, b);
    assert_ne!(a.0, c.0);
    assert_eq!(a.1, c.1);
}

#[test]
fn transform_single_point_and_batch() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("points.csv"), "q1,q2,q3,q4,p1,p2,p3,p4\n0.7,0.2,-0.4,1.0,1.0,0.2,0.3,0.1\n0,0,0,0,-3,1,0,0\n").unwrap();
    let cfg = write_config(dir.path(), &SMALL.replace("\"samples\": 5", "\"samples\": 5, \"transform\": {\"input_csv\": \"points.csv\"}"));
    let o = run_in("transform", &cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = report(&dir.path().join("out"));
    assert_eq!(r["transform"]["batch_rows"], 2);
    assert!((r["transform"]["output"][0].as_f64().unwrap() + 0.535).abs() < 1e-12);
    assert!(r["warnings"].as_array().unwrap().iter().any(|w| w.as_str().unwrap().contains("row 2")));
    let csv = std::fs::read_to_string(dir.path().join("out/transform.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[0].ends_with("Q1,Q2,Q3,Q4,P1,P2,P3,P4"));
    assert!(lines[2].ends_with(",,,,,,,"));
}

#[test]
fn transform_without_branch_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let body = SMALL.replace("\"branch\": {\"kind\": \"alcubierre\", \"branch\": \"wb\", \"vs\": 0.5, \"q_s\": 0.0},", "");
    let cfg = write_config(dir.path(), &body);
    let o = run_in("transform", &cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("branch"));
}

#[test]
fn godel_regime_warning_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{
        "model": {"kind": "godel_approx", "omega": 0.5},
        "initial_state": {"q": [0.0, 1.0, 0.0, 0.0], "p": [1.0, 0.2, 0.3, 0.1]},
        "integrator": {"method": "rk4", "dt": 0.01},
        "t_span": [0.0, 0.05]
    }"#;
    let cfg = write_config(dir.path(), body);
    let o = run_in("integrate", &cfg, dir.path(), &[]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stderr).contains("small-rotation"));
    assert_eq!(report(dir.path())["warnings"].as_array().unwrap().len(), 1);
}

#[test]
fn check_master_writes_relation_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    assert_eq!(run_in("check-master", &cfg, dir.path(), &[]).status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("master.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "relation,h,l,residual,pass");
    assert_eq!(lines.len(), 1 + 6 * 16);
    assert!(lines[1..].iter().all(|l| l.ends_with(",true")));
}
