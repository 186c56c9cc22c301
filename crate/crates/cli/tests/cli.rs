use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn csc(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_csc"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn verify_passes_with_defaults_and_sorts_checks() {
    let dir = tempfile::tempdir().unwrap();
    let o = csc(&["verify"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("verify_report.json"));
    assert_eq!(r["passed"], true);
    let names: Vec<&str> = r["checks"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    let mut sorted = names.clone();
    sorted.sort_unstable();
    assert_eq!(names, sorted);
    assert!(r["checks"].as_array().unwrap().iter().all(|c| !c["anchor"].as_str().unwrap().is_empty()));
    assert_eq!(r["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn verify_is_byte_identical_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    for (p, seed) in [(&a, "3"), (&b, "3"), (&c, "4")] {
        assert!(csc(&["verify", "--seed", seed], p).status.success());
    }
    let read = |p: &Path| std::fs::read(p.join("verify_report.json")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_ne!(read(&a), read(&c));
}

#[test]
fn zero_tolerance_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = csc(&["verify", "--tol", "0"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let payload: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(payload["error"], "usage");

    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"tol": 0.0}"#).unwrap();
    let o = csc(&["verify", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_config_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"k": "one"}"#).unwrap();
    let o = csc(&["solve", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(json(&dir.path().join("error.json"))["error"], "json");
}

#[test]
fn foliate_samples_the_unit_leaf_exactly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"samples": 100, "ks": [1.0], "grid_h": 0.125}"#).unwrap();
    let o = csc(&["foliate", "--k", "1", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let f = json(&dir.path().join("foliation.json"));
    assert_eq!(f["seed"], 0);
    let s = &f["result"]["samples"][0];
    assert_eq!(s["k"], 1.0);
    assert_eq!(s["points"].as_array().unwrap().len(), 100);
    let res = s["residuals"].as_array().unwrap();
    assert_eq!(res.len(), 100);
    assert!(res.iter().all(|r| r.as_f64().unwrap() <= 1e-10));
    // every point lies on ‖x‖² = -1
    for p in s["points"].as_array().unwrap() {
        let x: Vec<f64> = p.as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
        let n = x[..3].iter().map(|v| v * v).sum::<f64>() - x[3] * x[3];
        assert!((n + 1.0).abs() <= 1e-9 * (1.0 + x[3] * x[3]));
    }
}

#[test]
fn solve_recovers_a_boosted_hyperboloid() {
    let dir = tempfile::tempdir().unwrap();
    let o = csc(&["solve", "--grid-h", "0.125"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("solve_report.json"));
    assert_eq!(r["command"], "solve");
    assert_eq!(r["result"]["report"]["converged"], true);
    assert!(r["result"]["residual"].as_f64().unwrap() <= 1e-8);
    assert!(r["result"]["max_error"].as_f64().unwrap() <= 1e-2);

    // the solution feeds back in as boundary data; the input is untouched
    let sol = dir.path().join("solution.json");
    let before = std::fs::read(&sol).unwrap();
    let again = dir.path().join("again");
    let o = csc(&["solve", "--input", sol.to_str().unwrap()], &again);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(&sol).unwrap(), before);
}

#[test]
fn non_spacelike_boundary_reports_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("steep.json");
    // u = 2 x0 on a 5×5×5 grid: |∇u| = 2
    let mut values = Vec::new();
    for i in 0..5 {
        for _ in 0..25 {
            values.push(2.0 * (-0.5 + 0.25 * i as f64));
        }
    }
    let doc = serde_json::json!({
        "domain_min": [-0.5, -0.5, -0.5],
        "domain_max": [0.5, 0.5, 0.5],
        "shape": [5, 5, 5],
        "values": values,
    });
    std::fs::write(&input, doc.to_string()).unwrap();
    let out = dir.path().join("out");
    let o = csc(&["solve", "--input", input.to_str().unwrap()], &out);
    assert!(!o.status.success());
    assert_ne!(o.status.code(), Some(0));
    let payload: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert!(!payload["message"].as_str().unwrap().is_empty());
    assert_eq!(payload["exit_code"].as_u64(), o.status.code().map(|c| c as u64));
    assert_eq!(json(&out.join("error.json"))["error"], payload["error"]);
}

#[test]
fn continuation_writes_a_manifest_per_step() {
    let dir = tempfile::tempdir().unwrap();
    let o = csc(&["continue", "--steps", "4", "--grid-h", "0.125"], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m = json(&dir.path().join("manifest.json"));
    let entries = m["result"]["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 5);
    for e in entries {
        assert!(e["residual"].as_f64().unwrap() <= 1e-8);
        assert!(e["min_principal"].as_f64().unwrap() > 0.0);
        assert!(dir.path().join(e["file"].as_str().unwrap()).exists());
    }
}

#[test]
fn lift_and_curtain_write_point_clouds() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    // σ₂(A) = 1 on the leaf k = 1/√3, so its lift is special at angle π/2
    std::fs::write(&cfg, r#"{"surface": {"kind": "round"}, "samples": 20}"#).unwrap();
    let o = csc(&["lift", "--k", "0.5773502691896258", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let l = json(&dir.path().join("lift.json"));
    assert_eq!(l["result"]["convex"], 20);
    assert_eq!(l["result"]["convex_positive"], 20);
    assert!(l["result"]["max_defect"].as_f64().unwrap() <= 1e-9);
    let mut rdr = csv::Reader::from_path(dir.path().join("lift.csv")).unwrap();
    let header: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    assert!(header.contains(&"sl_defect".to_string()) && header.contains(&"m0".to_string()));
    assert_eq!(rdr.records().count(), 20);

    let o = csc(&["curtain", "--config", cfg.to_str().unwrap()], dir.path());
    assert!(o.status.success());
    let c = json(&dir.path().join("curtain.json"));
    assert_eq!(c["result"]["samples"], 60);
    assert!(c["result"]["max_defect"].as_f64().unwrap() <= 1e-9);
    assert!(c["result"]["min_nullity"].as_u64().unwrap() >= 1);
}

#[test]
fn cocycle_command_reads_a_document() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("cocycle.json");
    std::fs::write(
        &input,
        r#"{"generators": {"a": [[1,0,0,0],[0,0,-1,0],[0,1,0,0],[0,0,0,1]]},
            "tau": {"a": [0.0, 1.0, 0.5, 0.0]}, "relators": ["a a a a"]}"#,
    )
    .unwrap();
    let o = csc(&["cocycle", "--input", input.to_str().unwrap()], dir.path());
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(json(&dir.path().join("cocycle.json"))["result"]["max_defect"].as_f64().unwrap() <= 1e-12);

    let o = csc(&["cocycle"], &dir.path().join("none"));
    assert_eq!(o.status.code(), Some(2));
}
