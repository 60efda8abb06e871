mod common;

use std::path::Path;
use std::process::{Command, Output};
use std::sync::Arc;

use dreams::layout::{layout, LayoutConfig};
use dreams::service::{router, Store};
use dreams::store;
use serde_json::Value;

fn dreams(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dreams"))
        .args(args)
        .env("NO_COLOR", "1")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn ok(args: &[&str]) -> String {
    let o = dreams(args);
    assert_eq!(o.status.code(), Some(0), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    stdout(&o).trim().to_owned()
}

/// Builds a small model in `dir` through the command line; returns its path.
fn build(dir: &Path) -> String {
    let f = dir.join("m.dreams.json").to_str().unwrap().to_owned();
    ok(&["new", "--kind", "im", "--title", "Impact of integrated evidence", "--file", &f]);
    let a = ok(&["add-node", "--file", &f, "--kind", "key_factor", "--label", "Evidence on links", "--tag", "traceability"]);
    let b = ok(&["add-node", "--file", &f, "--kind", "success_factor", "--label", "Retrieval time"]);
    let c = ok(&["add-node", "--file", &f, "--kind", "influencing_factor", "--label", "Model size"]);
    let l1 = ok(&["add-link", "--file", &f, "--source", &a, "--target", &b, "--polarity", "-"]);
    let l2 = ok(&["add-link", "--file", &f, "--source", &c, "--target", &b, "--polarity", "+"]);
    ok(&["attach", "--file", &f, "--link", &l1, "--kind", "experience", "--text", "Pilot users opened sources directly"]);
    ok(&["attach", "--file", &f, "--link", &l2, "--kind", "reference", "--text", "Larger graphs are read slower", "--locator", "doi:10.1109/x"]);
    f
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(dreams(&[]).status.code(), Some(2));
    assert_eq!(dreams(&["layout"]).status.code(), Some(2));
    assert_eq!(dreams(&["new", "--kind", "xx", "--title", "t", "--file", "x"]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(dreams(&["validate", "--file", missing.to_str().unwrap()]).status.code(), Some(3));
    let f = build(dir.path());
    assert_eq!(dreams(&["validate", "--file", &f]).status.code(), Some(0));

    // a corrupted file: a dangling endpoint and an empty label
    let text = std::fs::read_to_string(&f).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["links"][0]["target"] = "n_gone".into();
    v["nodes"][2]["label"] = "".into();
    let bad = dir.path().join("corrupted.json");
    std::fs::write(&bad, v.to_string()).unwrap();
    let o = dreams(&["validate", "--file", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let lines: Vec<String> = stdout(&o).lines().map(str::to_owned).collect();
    assert_eq!(lines.len(), 2, "{lines:?}");
    assert!(lines.iter().any(|l| l.starts_with("dangling_endpoint\tl_")));
    assert!(lines.iter().any(|l| l.starts_with("empty_label\tn_")));
}

#[test]
fn failed_edits_leave_the_file_alone() {
    let dir = tempfile::tempdir().unwrap();
    let f = build(dir.path());
    let before = std::fs::read(&f).unwrap();
    let o = dreams(&["add-link", "--file", &f, "--source", "n_x", "--target", "n_y", "--polarity", "+"]);
    assert_eq!(o.status.code(), Some(1));
    let o = dreams(&["add-node", "--file", &f, "--kind", "key_factor", "--label", "  "]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(std::fs::read(&f).unwrap(), before);
    let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names.len(), 1);
}

#[test]
fn layout_and_stats_agree_with_library() {
    let dir = tempfile::tempdir().unwrap();
    let f = build(dir.path());
    let out: Value = serde_json::from_str(&ok(&["layout", "--file", &f, "--json"])).unwrap();
    let doc = store::deserialize(&std::fs::read_to_string(&f).unwrap()).unwrap();
    let lib = layout(&doc, &LayoutConfig::default(), None).unwrap();
    assert_eq!(out["layout"], serde_json::to_value(&lib).unwrap());
    let stats: Value = serde_json::from_str(&ok(&["stats", "--file", &f, "--json"])).unwrap();
    assert_eq!(stats["crossing_count"], lib.crossing_count);
    let table = ok(&["stats", "--file", &f]);
    assert!(table.lines().any(|l| l.starts_with("Edge crossings")));
}

#[test]
fn incremental_layout_from_previous_output() {
    let dir = tempfile::tempdir().unwrap();
    let f = build(dir.path());
    let prev = dir.path().join("prev.json");
    ok(&["layout", "--file", &f, "--json", "--out", prev.to_str().unwrap()]);
    let doc = store::deserialize(&std::fs::read_to_string(&f).unwrap()).unwrap();
    let leaf = ok(&["add-node", "--file", &f, "--kind", "success_factor", "--label", "Trust in model"]);
    ok(&["add-link", "--file", &f, "--source", &doc.links[0].target, "--target", &leaf, "--polarity", "+"]);
    let next: Value = serde_json::from_str(&ok(&["layout", "--file", &f, "--json", "--previous", prev.to_str().unwrap()])).unwrap();
    assert_eq!(next["layout"]["layer_of"].as_object().unwrap().len(), 4);
}

#[test]
fn stats_with_session_log() {
    let dir = tempfile::tempdir().unwrap();
    let f = build(dir.path());
    let log = dir.path().join("session.json");
    std::fs::write(
        &log,
        r#"{"actions":[
            {"at":"2026-02-01T10:00:00Z","action":"phase_start","phase":"revision"},
            {"at":"2026-02-01T10:00:30Z","action":"auto_layout"},
            {"at":"2026-02-01T10:02:00Z","action":"phase_end","phase":"revision"}]}"#,
    )
    .unwrap();
    let stats: Value = serde_json::from_str(&ok(&["stats", "--file", &f, "--json", "--log", log.to_str().unwrap()])).unwrap();
    assert_eq!(stats["repositioning_actions"], 0);
    assert_eq!(stats["revision_seconds"], 120.0);
    std::fs::write(&log, r#"{"actions":[{"at":"2026-02-01T10:00:00Z","action":"phase_start","phase":"revision"}]}"#).unwrap();
    assert_eq!(dreams(&["stats", "--file", &f, "--log", log.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn exports_are_written() {
    let dir = tempfile::tempdir().unwrap();
    let f = build(dir.path());
    let svg = dir.path().join("m.svg");
    ok(&["render", "--file", &f, "--out", svg.to_str().unwrap(), "--direction", "left_right"]);
    roxmltree::Document::parse(&std::fs::read_to_string(&svg).unwrap()).unwrap();
    let dot = ok(&["export-dot", "--file", &f]);
    assert!(dot.starts_with("digraph"));
}

#[test]
fn search_lines() {
    let dir = tempfile::tempdir().unwrap();
    let f = build(dir.path());
    let out = ok(&["search", "--file", &f, "pilot"]);
    let cols: Vec<&str> = out.lines().next().unwrap().split('\t').collect();
    assert_eq!(cols.len(), 4);
    assert_eq!(cols[0], "2.00");
    assert!(cols[1].starts_with("e_"));
    assert_eq!(cols[2], "evidence_text");
    assert_eq!(cols[3], "Pilot users opened sources directly");
    let filtered = ok(&["search", "--file", &f, "--polarity", "+", "--evidence", "reference"]);
    assert_eq!(filtered.lines().count(), 1);
}

#[tokio::test]
async fn json_output_matches_service_bodies() {
    let dir = tempfile::tempdir().unwrap();
    let f = build(dir.path());
    let doc = store::deserialize(&std::fs::read_to_string(&f).unwrap()).unwrap();
    let data = dir.path().join("data");
    std::fs::create_dir(&data).unwrap();
    std::fs::copy(&f, data.join(format!("{}.dreams.json", doc.id))).unwrap();

    let app = router(Arc::new(Store::open(&data, LayoutConfig::default()).unwrap()), None).unwrap();
    let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
    let base = format!("http://{}/models/{}", listener.local_addr().unwrap(), doc.id);
    tokio::spawn(async move { axum::serve(listener, app).await.unwrap() });
    let get = |path: String| async move { reqwest::get(path).await.unwrap().json::<Value>().await.unwrap() };

    let cli: Value = serde_json::from_str(&ok(&["search", "--file", &f, "--json", "model"])).unwrap();
    assert_eq!(cli, get(format!("{base}/search?q=model")).await);
    let cli: Value = serde_json::from_str(&ok(&["stats", "--file", &f, "--json"])).unwrap();
    assert_eq!(cli, get(format!("{base}/stats")).await);
    let cli: Value = serde_json::from_str(&ok(&["layout", "--file", &f, "--json"])).unwrap();
    assert_eq!(cli, get(format!("{base}/layout")).await);
}
