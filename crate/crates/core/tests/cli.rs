use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(dir: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(dir)
        .join("manifest.json")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sustain-eval"))
        .args(args)
        .env_remove("SUSTAIN_EVAL_THREADS")
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn metric<'a>(doc: &'a Value, name: &str) -> &'a Value {
    doc["metrics"]
        .as_array()
        .unwrap()
        .iter()
        .find(|m| m["metric"] == name)
        .unwrap()
}

#[test]
fn evaluate_selection_has_exactly_the_requested_metrics() {
    let m = fixture("environmental");
    let doc = json(&run(&["evaluate", "--manifest", m.to_str().unwrap(), "-m", "girec,hier"]));
    let names: Vec<&str> = doc["metrics"].as_array().unwrap().iter().map(|m| m["metric"].as_str().unwrap()).collect();
    assert_eq!(names, ["girec", "hier"]);
    assert_eq!(doc["schema_version"], 1);
    assert_eq!(doc["engine_version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn absent_energy_table_reports_missing_table() {
    let m = fixture("social");
    let doc = json(&run(&["evaluate", "--manifest", m.to_str().unwrap()]));
    for name in ["ecrec", "ectrain", "ecpdat"] {
        assert_eq!(metric(&doc, name)["status"], "undefined: missing table");
        assert_eq!(metric(&doc, name)["value"], Value::Null);
    }
    assert_eq!(metric(&doc, "parity")["value"], 0.5);
    assert!(metric(&doc, "parity")["breakdowns"]["item_gap"].is_object());
}

#[test]
fn bad_manifest_path_is_a_data_error() {
    let out = run(&["evaluate", "--manifest", "/nonexistent/manifest.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn usage_errors_exit_one() {
    let m = fixture("environmental");
    let m = m.to_str().unwrap();
    assert_eq!(run(&["evaluate", "--manifest", m, "-m", "nosuch"]).status.code(), Some(1));
    assert_eq!(run(&["evaluate"]).status.code(), Some(1));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(run(&["rerank", "--manifest", m, "--objective", "water"]).status.code(), Some(1));
    assert_eq!(run(&["rerank", "--manifest", m, "--grid", "0"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let bad_threads = Command::new(env!("CARGO_BIN_EXE_sustain-eval"))
        .args(["evaluate", "--manifest", m])
        .env("SUSTAIN_EVAL_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(bad_threads.status.code(), Some(1));
}

#[test]
fn hard_validation_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let src = fixture("crosscut");
    for f in fs::read_dir(src.parent().unwrap()).unwrap() {
        let f = f.unwrap();
        fs::copy(f.path(), dir.path().join(f.file_name())).unwrap();
    }
    fs::write(
        dir.path().join("recommendations.csv"),
        "user_id,rank,item_id,timestamp\nu1,1,zzz,\n",
    )
    .unwrap();
    let out = run(&["evaluate", "--manifest", dir.path().join("manifest.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("zzz"));
}

#[test]
fn coverage_rows() {
    let m = fixture("environmental");
    let out = run(&["coverage", "--manifest", m.to_str().unwrap(), "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.lines().any(|l| l == "is_green,girec,0.8"), "{text}");
    assert_eq!(text.lines().count(), 8);
}

#[test]
fn coverage_of_fully_labeled_catalog_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("synth.json");
    fs::write(
        &cfg,
        r#"{"missingness": {"carbon": 0, "green": 0, "harmful": 0, "lci": 0, "producer": 0, "region": 0, "label": 0}}"#,
    )
    .unwrap();
    let data = dir.path().join("data");
    let out = run(&["synth", "--config", cfg.to_str().unwrap(), "--seed", "3", "--out", data.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&run(&["coverage", "--manifest", data.join("manifest.json").to_str().unwrap()]));
    for row in doc["fields"].as_array().unwrap() {
        assert_eq!(row["coverage"], 1.0, "{row}");
    }
}

#[test]
fn coverage_of_empty_catalog_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("catalog.csv"),
        "item_id,carbon_footprint,is_green,is_harmful,lci_score,producer_id,producer_region,sustainability_label\n",
    )
    .unwrap();
    fs::write(dir.path().join("manifest.json"), r#"{"schema_version": 1, "tables": {"catalog": "catalog.csv"}}"#).unwrap();
    let out = run(&["coverage", "--manifest", dir.path().join("manifest.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn rerank_small_fixture_gives_three_point_frontier() {
    let m = fixture("rerank_small");
    let doc = json(&run(&["rerank", "--manifest", m.to_str().unwrap(), "--k", "2", "--grid", "3"]));
    let rows = doc["users"][0]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    let lists: Vec<&Value> = rows.iter().map(|r| &r["items"]).collect();
    assert_eq!(lists, [&serde_json::json!(["c", "d"]), &serde_json::json!(["a", "c"]), &serde_json::json!(["a", "b"])]);
}

#[test]
fn green_filter_on_all_green_pool() {
    let m = fixture("rerank_green");
    let doc = json(&run(&["rerank", "--manifest", m.to_str().unwrap(), "--k", "2", "--green-filter"]));
    let users = doc["users"].as_array().unwrap();
    assert_eq!(users.len(), 2);
    for u in users {
        assert_eq!(u["rows"][0]["sustainability"], 1.0);
        assert_eq!(u["rows"][0]["non_green_used"], 0);
    }
}

#[test]
fn rerank_pool_smaller_than_k_is_reported_per_user() {
    let m = fixture("rerank_green");
    let doc = json(&run(&["rerank", "--manifest", m.to_str().unwrap(), "--k", "3"]));
    assert_eq!(doc["users"][0]["status"], "ok");
    assert!(doc["users"][1]["status"].as_str().unwrap().starts_with("error: candidate pool"));
}

#[test]
fn out_flag_writes_file_and_synth_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        assert!(run(&["synth", "--seed", "7", "--out", d.to_str().unwrap()]).status.success());
    }
    for f in fs::read_dir(&a).unwrap() {
        let f = f.unwrap();
        assert_eq!(fs::read(f.path()).unwrap(), fs::read(b.join(f.file_name())).unwrap());
    }
    let report = dir.path().join("report.csv");
    let out = run(&[
        "evaluate",
        "--manifest",
        a.join("manifest.json").to_str().unwrap(),
        "--format",
        "csv",
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert!(fs::read_to_string(report).unwrap().starts_with("metric,status,scope,key,value,coverage"));
}
