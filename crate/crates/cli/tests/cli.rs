use std::path::Path;
use std::process::{Command, Output};

use cachecast::coded_caching::{mds_decode, parse_frames};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cachecast"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn body_without_comments(path: &Path) -> String {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn deliver_demo_reports_full_recovery() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("demo");
    let o = run(&["deliver-demo", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    for line in ["all 3 users recovered files", "10/10 MDS subsets decode", "codeword length matches formula"] {
        assert!(text.contains(line), "missing `{line}` in\n{text}");
    }
    let report = std::fs::read_to_string(out.join("deliver_demo.txt")).unwrap();
    assert!(report.contains("all 3 users recovered files"));

    // blocks on disk decode from any two of the five frames
    let frames = parse_frames(&std::fs::read(out.join("demo_blocks.bin")).unwrap()).unwrap();
    assert_eq!(frames.len(), 5);
    let a = mds_decode(&frames[..2], 2, 5, 480).unwrap();
    let b = mds_decode(&[frames[4].clone(), frames[3].clone()], 2, 5, 480).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 60);
}

#[test]
fn optimize_writes_plan_with_selected_l() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["optimize", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("selected_L=3"));
    let plan: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("planner.json")).unwrap()).unwrap();
    assert_eq!(plan["result"]["selected_L"], 3);
    assert_eq!(plan["provenance"]["trials"], "analytic");
    assert_eq!(plan["result"]["records"].as_array().unwrap().len(), 8);
}

#[test]
fn analyze_csv_carries_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["analyze", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("avg_rates.csv")).unwrap();
    for key in ["# config_hash: ", "# seed: 1", "# trials: analytic", "# version: "] {
        assert!(csv.contains(key), "missing {key}");
    }
    assert!(csv.contains("\nell,pzf,pzf_sic\n"));
}

#[test]
fn worker_count_does_not_change_output() {
    let dir = tempfile::tempdir().unwrap();
    let mut bodies = Vec::new();
    for w in ["1", "3"] {
        let out = dir.path().join(format!("w{w}"));
        let o = run(&[
            "simulate", "--trials", "300", "--seed", "11", "--workers", w, "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        bodies.push(body_without_comments(&out.join("outage_mc.csv")));
    }
    assert_eq!(bodies[0], bodies[1]);
}

#[test]
fn unknown_config_field_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"bogus": 1}"#).unwrap();
    let o = run(&["analyze", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bogus"));
}

#[test]
fn out_of_range_parameter_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["analyze", "--L", "9", "--nr", "8", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, b"x").unwrap();
    let o = run(&["analyze", "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
}
