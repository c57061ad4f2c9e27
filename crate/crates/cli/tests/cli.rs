use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn sidlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sidlab")).args(args).env_remove("SIDLAB_JOBS").output().unwrap()
}

fn json_out(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn construct_flower_is_a_bowtie() {
    let out = sidlab(&["construct", "--family", "flower", "--lengths", "3,3"]);
    assert_eq!(out.status.code(), Some(0));
    let g = json_out(&out);
    assert_eq!(g["n"], 5);
    assert_eq!(g["edges"].as_array().unwrap().len(), 6);
    assert_eq!(g["header"]["tool"], "sidlab");
}

#[test]
fn construct_theta_writes_graph_json() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g.json");
    let out = sidlab(&["construct", "--family", "theta", "--lengths", "2,2", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let g: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(g["n"], 4);
    assert_eq!(g["edges"].as_array().unwrap().len(), 4);
    assert_eq!(g["roots"], serde_json::json!([0, 1]));
}

#[test]
fn c4_in_the_bipartite_graphon() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "c4.json", r#"{"n":4,"edges":[[0,1],[1,2],[2,3],[3,0]]}"#);
    let w = write(dir.path(), "w.json", r#"{"n":2,"values":[["0","1"],["1","0"]]}"#);
    let out = sidlab(&["density", "--graph", &g, "--graphon", &w, "--mode", "exact"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_out(&out);
    assert_eq!(v["value"], "1/8");
    assert_eq!(v["mode"], "exact");
    assert_eq!(v["vH"], 4);
}

#[test]
fn decimals_need_the_float_flag() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "k2.json", r#"{"n":2,"edges":[[0,1]]}"#);
    let w = write(dir.path(), "w.json", r#"{"n":1,"values":[["0.5"]]}"#);
    assert_eq!(sidlab(&["density", "--graph", &g, "--graphon", &w]).status.code(), Some(3));
    let out = sidlab(&["density", "--graph", &g, "--graphon", &w, "--float"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json_out(&out)["value"], "1/2");
}

#[test]
fn density_flags_a_local_density_violation() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "k2.json", r#"{"n":2,"edges":[[0,1]]}"#);
    let w = write(dir.path(), "w.json", r#"{"n":2,"values":[["4/5","1/20"],["1/20","7/20"]]}"#);
    let out = sidlab(&["density", "--graph", &g, "--graphon", &w, "--local-dense", "3/10"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json_out(&out)["local_density"]["certified_violation"], true);
}

#[test]
fn batch_keeps_request_order() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "k2.json", r#"{"n":2,"edges":[[0,1]]}"#);
    write(dir.path(), "w.json", r#"{"n":1,"values":[["1/3"]]}"#);
    let batch = write(
        dir.path(),
        "batch.json",
        r#"[{"graph":"k2.json","graphon":"w.json"},
            {"graph":{"n":3,"edges":[[0,1],[1,2],[0,2]]},"graphon":"w.json"}]"#,
    );
    let out = sidlab(&["density", "--batch", &batch]);
    assert_eq!(out.status.code(), Some(0));
    let results = json_out(&out)["results"].clone();
    assert_eq!(results[0]["value"], "1/3");
    assert_eq!(results[1]["value"], "1/27");
}

#[test]
fn verify_is_reproducible_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for path in [&a, &b] {
        let out =
            sidlab(&["verify", "--suite", "lemma31", "--trials", "20", "--seed", "7", "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
    }
    let text = fs::read(&a).unwrap();
    assert_eq!(text, fs::read(&b).unwrap());
    let report: Value = serde_json::from_slice(&text).unwrap();
    assert_eq!(report["failures"].as_array().unwrap().len(), 0);
    assert_eq!(report["header"]["seed"], 7);
    assert!(report.get("runtime_ms").is_none());

    let out = sidlab(&["report", a.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let csv = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("lemma31,20,0,"));
}

#[test]
fn report_sorts_and_handles_empty_input() {
    let out = sidlab(&["report"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "suite,trials,failures,min_gap,max_gap,runtime_ms\n");

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("many.json");
    let out =
        sidlab(&["verify", "--suite", "oracle", "--suite", "holder", "--trials", "3", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let out = sidlab(&["report", path.to_str().unwrap()]);
    let csv = String::from_utf8(out.stdout).unwrap();
    let suites: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(suites, ["holder", "oracle"]);
}

#[test]
fn exit_codes() {
    assert_eq!(sidlab(&["verify", "--suite", "lemma99"]).status.code(), Some(2));
    assert_eq!(sidlab(&["construct", "--family", "theta", "--bogus"]).status.code(), Some(2));
    assert_eq!(sidlab(&["construct", "--family", "theta"]).status.code(), Some(2));
    assert_eq!(sidlab(&["report", "/nonexistent/r.json"]).status.code(), Some(3));
    let dir = tempfile::tempdir().unwrap();
    let junk = write(dir.path(), "junk.json", "{not json");
    assert_eq!(sidlab(&["report", &junk]).status.code(), Some(3));
    let g = write(dir.path(), "k3.json", r#"{"n":3,"edges":[[0,1],[1,2],[0,2]]}"#);
    assert_eq!(sidlab(&["search", "--graph", &g, "--n", "3", "--d", "1/2"]).status.code(), Some(2));
    assert_eq!(sidlab(&["search", "--graph", &g, "--n", "3", "--d", "0.5"]).status.code(), Some(2));
}

#[test]
fn search_writes_a_result_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let g = write(dir.path(), "c4.json", r#"{"n":4,"edges":[[0,1],[1,2],[2,3],[3,0]]}"#);
    let trace = dir.path().join("trace.csv");
    let args = [
        "search",
        "--graph",
        &g,
        "--n",
        "3",
        "--d",
        "1/2",
        "--seed",
        "3",
        "--starts",
        "4",
        "--iterations",
        "50",
        "--trace",
        trace.to_str().unwrap(),
    ];
    let first = sidlab(&args);
    assert_eq!(first.status.code(), Some(0));
    let result = json_out(&first);
    assert!(result["best_deficit"].as_f64().unwrap() >= 0.0);
    assert_eq!(result["best_W"]["n"], 3);
    assert_eq!(result["counterexample"], false);
    assert!(fs::read_to_string(&trace).unwrap().starts_with("iteration,deficit\n"));
    assert_eq!(sidlab(&args).stdout, first.stdout);
}

#[test]
fn jobs_flag_does_not_change_output() {
    let one = sidlab(&["--jobs", "1", "verify", "--suite", "oracle", "--trials", "10", "--seed", "2"]);
    let four = sidlab(&["verify", "--suite", "oracle", "--trials", "10", "--seed", "2", "--jobs", "4"]);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    assert_eq!(sidlab(&["--jobs", "0", "verify", "--suite", "oracle"]).status.code(), Some(2));
}
