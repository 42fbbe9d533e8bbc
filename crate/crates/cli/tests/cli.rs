use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn forge(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_forge"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("forge runs")
}

fn text(out: &Output) -> String {
    format!("{}{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr))
}

fn synth(dir: &Path) {
    let out = forge(
        &["synth", "--scenes-out", "scenes.jsonl", "--qa-out", "qa.jsonl", "--scene-count", "6", "--per-task", "10", "--seed", "2"],
        dir,
    );
    assert!(out.status.success(), "{}", text(&out));
}

#[test]
fn generate_then_validate() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let out = forge(
        &["generate", "--scenes", "scenes.jsonl", "--qa", "qa.jsonl", "--out", "traces.jsonl", "--seed", "4"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", text(&out));
    assert!(text(&out).contains("input 60  generated 60  failed 0  violations 0"));
    let traces = fs::read_to_string(dir.path().join("traces.jsonl")).unwrap();
    assert_eq!(traces.lines().count(), 60);

    let out = forge(&["validate", "--traces", "traces.jsonl"], dir.path());
    assert!(out.status.success(), "{}", text(&out));
    assert!(text(&out).contains("60 records, 0 with violations"));

    // same seed, different worker count, same bytes
    let out = forge(
        &["--workers", "1", "generate", "--scenes", "scenes.jsonl", "--qa", "qa.jsonl", "--out", "again.jsonl", "--seed", "4"],
        dir.path(),
    );
    assert!(out.status.success());
    assert_eq!(fs::read(dir.path().join("again.jsonl")).unwrap(), traces.as_bytes());
}

#[test]
fn unknown_scene_fails_one_record() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let qa = fs::read_to_string(dir.path().join("qa.jsonl")).unwrap();
    let broken = qa.replacen("\"scene_id\":\"synth00000\"", "\"scene_id\":\"missing\"", 1);
    assert_ne!(broken, qa);
    fs::write(dir.path().join("qa.jsonl"), broken).unwrap();
    let out = forge(&["generate", "--scenes", "scenes.jsonl", "--qa", "qa.jsonl", "--out", "t.jsonl"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out).contains("unknown scene \"missing\""));
    assert_eq!(fs::read_to_string(dir.path().join("t.jsonl")).unwrap().lines().count(), 59);
}

#[test]
fn validate_flags_corrupted_trace() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    forge(&["generate", "--scenes", "scenes.jsonl", "--qa", "qa.jsonl", "--out", "t.jsonl"], dir.path());
    let traces = fs::read_to_string(dir.path().join("t.jsonl")).unwrap();
    fs::write(dir.path().join("t.jsonl"), traces.replacen("[OBJ]", "", 1)).unwrap();
    let out = forge(&["validate", "--traces", "t.jsonl"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(text(&out).contains("line 1: grammar:"), "{}", text(&out));
}

#[test]
fn eval_reports_oracle_closure() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    let out = forge(
        &["eval", "--scenes", "scenes.jsonl", "--qa", "qa.jsonl", "--mode", "oracle", "--report", "report.json"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", text(&out));
    let table = text(&out);
    for task in ["counting", "existence", "refer", "navigation", "spatial_relationship"] {
        let row = table.lines().find(|l| l.starts_with(task)).unwrap();
        assert!(row.ends_with("100.0"), "{row}");
    }
    assert!(table.lines().any(|l| l.starts_with("attribute") && l.ends_with("undefined")));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["overall"]["total"], 60);
    assert_eq!(report["overall"]["unsupported"], 10);

    let out = forge(&["answer", "--scenes", "scenes.jsonl", "--qa", "qa.jsonl", "--mode", "oracle"], dir.path());
    assert!(out.status.success());
    let first: serde_json::Value = serde_json::from_str(String::from_utf8_lossy(&out.stdout).lines().next().unwrap()).unwrap();
    assert_eq!(first["correct"], true);

    let out = forge(
        &["eval", "--scenes", "scenes.jsonl", "--qa", "qa.jsonl", "--mode", "ge", "--ge-rate", "1.5"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn partition_and_coherence() {
    let dir = tempfile::tempdir().unwrap();
    let scene = r#"{"scene_id":"s","objects":[
        {"id":1,"label":"door","center":[0,3,1],"size":[1,0.1,2]},
        {"id":2,"label":"lamp","center":[2,0,1],"size":[0.3,0.3,1]},
        {"id":3,"label":"sofa","center":[-2,0.5,0.4],"size":[2,1,0.8]},
        {"id":4,"label":"bed","center":[0,-3,0.3],"size":[2,2,0.6]},
        {"id":5,"label":"rug","center":[0,0,0],"size":[1,1,0.01]}]}"#;
    fs::write(dir.path().join("scene.json"), scene).unwrap();
    let out = forge(&["partition", "--scene", "scene.json", "--situation", "0,0,0;0,1"], dir.path());
    assert!(out.status.success(), "{}", text(&out));
    let t = text(&out);
    let row = |name: &str| t.lines().find(|l| l.starts_with(name)).unwrap().to_string();
    assert!(row("front").ends_with("1:door"));
    assert!(row("right").ends_with("2:lamp"));
    assert!(row("left").ends_with("3:sofa"));
    assert!(row("back").ends_with("4:bed"));
    assert!(row("degenerate").ends_with("5:rug"));

    fs::write(
        dir.path().join("results.jsonl"),
        "[true,true]\n{\"grounding_correct\":false,\"qa_correct\":false}\n[true,false]\n[false,true]\n",
    )
    .unwrap();
    let out = forge(&["coherence", "--results", "results.jsonl"], dir.path());
    assert!(out.status.success(), "{}", text(&out));
    assert!(text(&out).contains("GC 25.0  Type1 25.0  Type2 25.0  DF 25.0  R1 50.0  R2 50.0  (n = 4)"));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    synth(dir.path());
    fs::write(dir.path().join("forge.toml"), "max_objects = 0\n").unwrap();
    let out = forge(
        &["generate", "--scenes", "scenes.jsonl", "--qa", "qa.jsonl", "--out", "t.jsonl", "--config", "forge.toml"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(text(&out).contains("max_objects must be positive"));
}
