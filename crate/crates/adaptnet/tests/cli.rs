use std::fs;
use std::path::Path;
use std::process::{Command, Output, Stdio};
use std::sync::atomic::AtomicBool;
use std::time::{Duration, Instant};

use adaptnet::commands::train_mode1_cmd;
use adaptnet_core::modes::Mode1Variant;
use adaptnet_core::ScenarioConfig;
use serde_json::Value;

fn adaptnet(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adaptnet"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn small_config(dir: &Path) -> String {
    let mut c = ScenarioConfig {
        uav_count: 2,
        target_count: 6,
        episode_steps: 60,
        episodes: 3,
        scale_counts: vec![1, 2],
        ..ScenarioConfig::default()
    };
    c.aoi_bench.lambdas = vec![0.3, 0.6];
    c.aoi_bench.horizon = 2_000.0;
    let p = dir.join("scenario.json");
    fs::write(&p, serde_json::to_string_pretty(&c).unwrap()).unwrap();
    p.to_str().unwrap().to_string()
}

fn write_tracks(dir: &Path) -> String {
    let mut s = String::from("id,x,y,t\n");
    for id in 0..6 {
        for k in 0..12 {
            let (x, y) = if id < 3 {
                (k as f64 * 4.0, id as f64 * 0.5)
            } else {
                (100.0 + id as f64 * 0.5, k as f64 * 4.0)
            };
            s.push_str(&format!("trk{id},{x},{y},{k}\n"));
        }
    }
    let p = dir.join("tracks.csv");
    fs::write(&p, s).unwrap();
    p.to_str().unwrap().to_string()
}

fn read(p: &Path) -> Vec<u8> {
    fs::read(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn every_command_runs_and_reruns_byte_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = small_config(tmp.path());
    let tracks = write_tracks(tmp.path());
    let cases: &[(&str, &[&str])] = &[
        ("simulate", &["metrics.csv", "aoi.csv", "detections.csv", "snapshots.jsonl", "cluster_map.csv", "trajectory_compare.csv", "summary.json"]),
        ("train-mode1", &["episodes.jsonl", "training_log.csv", "episodes.csv", "training_curves.csv", "checkpoint.json", "summary.json"]),
        ("train-mode2", &["episodes.jsonl", "training_log.csv", "checkpoint.json", "summary.json"]),
        ("aoi-bench", &["aoi_bench.csv", "aoi_curves.csv"]),
        ("cluster", &["clusters.csv", "cluster_map.csv"]),
        ("frechet", &["frechet.csv", "trajectory_compare.csv"]),
        ("scale-sweep", &["scale_sweep.csv"]),
    ];
    for (cmd, files) in cases {
        let mut outs = Vec::new();
        for run in 0..2 {
            let out = tmp.path().join(format!("{cmd}-{run}"));
            let o = adaptnet(&[cmd, "--config", &cfg, "--input", &tracks, "--out", out.to_str().unwrap()]);
            assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
            outs.push(out);
        }
        for f in *files {
            let (a, b) = (read(&outs[0].join(f)), read(&outs[1].join(f)));
            assert!(!a.is_empty(), "{cmd}/{f} is empty");
            assert!(a == b, "{cmd}/{f} differs between identical runs");
        }
    }
}

#[test]
fn exit_codes_separate_config_errors_from_runtime_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let out = out.to_str().unwrap();

    let bad = tmp.path().join("bad.json");
    fs::write(&bad, r#"{"uav_count": 0}"#).unwrap();
    let o = adaptnet(&["simulate", "--config", bad.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("uav_count"));

    let typo = tmp.path().join("typo.json");
    fs::write(&typo, r#"{"radar": {"prf": 1000}}"#).unwrap();
    let o = adaptnet(&["simulate", "--config", typo.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("prf"));

    let missing = tmp.path().join("nope.csv");
    let o = adaptnet(&["cluster", "--input", missing.to_str().unwrap(), "--out", out]);
    assert_eq!(o.status.code(), Some(1));

    let o = adaptnet(&["frechet", "--out", out]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn cluster_separates_two_obvious_groups() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("k2.json");
    fs::write(&cfg, r#"{"cluster_k": 2}"#).unwrap();
    let tracks = write_tracks(tmp.path());
    let out = tmp.path().join("o");
    let o = adaptnet(&["cluster", "--config", cfg.to_str().unwrap(), "--input", &tracks, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(out.join("clusters.csv")).unwrap();
    let rows: Vec<(String, String)> = rdr
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].to_string(), r[1].to_string())
        })
        .collect();
    assert_eq!(rows.len(), 6);
    let label = |id: &str| rows.iter().find(|r| r.0 == id).unwrap().1.clone();
    assert_eq!(label("trk0"), label("trk2"));
    assert_eq!(label("trk3"), label("trk5"));
    assert_ne!(label("trk0"), label("trk3"));
}

#[test]
fn preset_stop_writes_a_truncated_log() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = ScenarioConfig::reference_learning();
    c.episodes = 50;
    c.episode_steps = 10;
    let stop = AtomicBool::new(true);
    let s = train_mode1_cmd(&c, Mode1Variant::Cooperative, tmp.path(), &stop).unwrap();
    assert!(s.truncated);
    assert_eq!(s.episodes_completed, 1);
    let text = fs::read_to_string(tmp.path().join("episodes.jsonl")).unwrap();
    let last: Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(last["truncated"], Value::Bool(true));
    assert_eq!(last["episodes_completed"], 1);
    // Every line before the marker is a complete step record.
    for line in text.lines().rev().skip(1) {
        let v: Value = serde_json::from_str(line).unwrap();
        assert_eq!(v["episode"], 0);
    }
    let ckpt: Value = serde_json::from_str(&fs::read_to_string(tmp.path().join("checkpoint.json")).unwrap()).unwrap();
    assert_eq!(ckpt["complete"], Value::Bool(false));
}

#[cfg(unix)]
#[test]
fn interrupt_stops_training_with_a_marker() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = ScenarioConfig::reference_learning();
    c.episodes = 100_000;
    let cfg = tmp.path().join("long.json");
    fs::write(&cfg, serde_json::to_string(&c).unwrap()).unwrap();
    let out = tmp.path().join("o");
    let mut child = Command::new(env!("CARGO_BIN_EXE_adaptnet"))
        .args(["train-mode1", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
        .stdout(Stdio::null())
        .stderr(Stdio::null())
        .spawn()
        .unwrap();
    let log = out.join("episodes.jsonl");
    let started = Instant::now();
    while fs::metadata(&log).map(|m| m.len() == 0).unwrap_or(true) {
        assert!(started.elapsed() < Duration::from_secs(120), "training never logged");
        std::thread::sleep(Duration::from_millis(50));
    }
    let sent = Command::new("kill").args(["-INT", &child.id().to_string()]).status().unwrap();
    assert!(sent.success());
    let status = child.wait().unwrap();
    assert!(status.success());
    let text = fs::read_to_string(&log).unwrap();
    let last: Value = serde_json::from_str(text.lines().last().unwrap()).unwrap();
    assert_eq!(last["truncated"], Value::Bool(true));
    let n = last["episodes_completed"].as_u64().unwrap();
    assert!((1..100_000).contains(&n));
}
