use std::path::PathBuf;
use std::process::{Command, Output};

const Z2_CYCLE: &str = r#"{
  "schema": "aqsheaf.scenario/1",
  "name": "z2-cycle",
  "groups": { "z2": { "cyclic": 2 } },
  "nerves": { "c3": { "named": "cycle(3)" } },
  "sheaves": { "f": { "nerve": "c3", "group": "z2" } },
  "series": { "s": { "terms": { "sheaf": "f", "terms": [[0, 1], [0]] } } },
  "tasks": ["validate", "cohomology", "primary", "classify"]
}
"#;

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("aqsheaf-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(name: &str, text: &str) -> PathBuf {
    let path = scratch("inputs").join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn aqsheaf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aqsheaf")).args(args).env_remove("AQSHEAF_REPORT_DIR").output().unwrap()
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn constant_z2_on_a_triangle_has_two_torsors() {
    let path = write("z2.json", Z2_CYCLE);
    let out = aqsheaf(&["cohomology", path.to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["schema"], "aqsheaf.report/1");
    assert_eq!(r["results"]["series"][0]["torsor_classes"][0], 2);
}

#[test]
fn task_list_runs_in_order() {
    let path = write("z2-run.json", Z2_CYCLE);
    let r = json(&aqsheaf(&["run", path.to_str().unwrap(), "--json"]));
    let tasks: Vec<_> = r["results"].as_array().unwrap().iter().map(|t| t["task"].as_str().unwrap().to_string()).collect();
    assert_eq!(tasks, ["validate", "cohomology", "primary", "classify"]);
}

#[test]
fn lemma_suite_exits_zero() {
    let out = aqsheaf(&["verify", "--suite", "lemma-2-3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn green_rank_three_has_no_pseudo_rows() {
    let r = json(&aqsheaf(&["classify", "--all", "--bundled", "green-p5-q3-n2/cycle3", "--json"]));
    let s = &r["results"]["series"][0];
    assert_eq!(s["counts"]["pseudo_supermanifold"], 0);
    assert!(s["counts"]["supermanifold"].as_u64().unwrap() > 0);
}

#[test]
fn obstructed_class_is_reported_not_failed() {
    let r = json(&aqsheaf(&["integrate", "--bundled", "z4/rp2", "--theta", "1", "--json"]));
    assert_eq!(r["results"]["verdict"]["category"], "ObstructedThickening");
    assert_eq!(r["results"]["atlas"], serde_json::Value::Null);
}

#[test]
fn exit_codes_follow_the_error_kind() {
    let bad = write("bad.json", "{\n  \"schema\": \"aqsheaf.scenario/1\",\n  \"name\": 3\n}\n");
    let out = aqsheaf(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let dangling = write("dangling.json", &Z2_CYCLE.replace("\"group\": \"z2\"", "\"group\": \"s3\""));
    let out = aqsheaf(&["validate", dangling.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("\"s3\""));

    assert_eq!(aqsheaf(&["primary", "--bundled", "heis3/cycle3"]).status.code(), Some(0));
    assert_eq!(aqsheaf(&["cohomology", "--bundled", "z8/rp2", "--budget", "10"]).status.code(), Some(3));
    assert_eq!(aqsheaf(&["verify", "--suite", "no-such-suite"]).status.code(), Some(1));
}

#[test]
fn failed_checks_exit_two_and_name_the_anchor() {
    let out = aqsheaf(&["green", "--p", "5", "--q", "4", "--n", "2", "--json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["failures"][0]["anchor"], "green-structure");
}

#[test]
fn reports_are_identical_across_worker_counts() {
    let mut seen = Vec::new();
    for w in ["1", "2", "8"] {
        let out = aqsheaf(&["primary", "--bundled", "green-p5-q3-n2-mixed/cycle3", "--json", "--workers", w]);
        assert_eq!(out.status.code(), Some(0));
        seen.push(out.stdout);
    }
    assert!(seen.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn seeded_generation_is_reproducible_and_loads() {
    let dir = scratch("green");
    let a = dir.join("a.json");
    let b = dir.join("b.json");
    for p in [&a, &b] {
        let out = aqsheaf(&["green", "--p", "3", "--q", "3", "--n", "2", "--nerve", "cycle(3)", "--seed", "11", "--emit", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(aqsheaf(&["primary", a.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn report_directory_receives_the_report() {
    let dir = scratch("reports");
    let out = Command::new(env!("CARGO_BIN_EXE_aqsheaf"))
        .args(["validate", "--bundled", "q8/cycle3"])
        .env("AQSHEAF_REPORT_DIR", &dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(dir.join("q8_cycle3.validate.json")).unwrap();
    assert!(text.contains("\"command\": \"validate\""));
}
