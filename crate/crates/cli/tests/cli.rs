use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_framefinder");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("FRAMEFINDER_ENDPOINT")
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// A synthetic corpus plus fixtures in a fresh directory.
fn fixtures(documents: usize) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let n = documents.to_string();
    let out = run(&["synth-fixtures", "--out", dir.path().to_str().unwrap(), "--documents", &n]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    dir
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn help_and_version() {
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["analyze", "--help"])), 0);
    let out = run(&["--version"]);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("framefinder "));
    assert_eq!(code(&run(&[])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
}

#[test]
fn analyze_writes_result_and_dot() {
    let dir = fixtures(60);
    let result = dir.path().join("r.json");
    let dot = dir.path().join("r.dot");
    let out = run(&[
        "analyze",
        "--input",
        p(&dir.path().join("synthetic.txt")),
        "--fixtures",
        p(dir.path()),
        "--node-threshold",
        "5",
        "--out",
        p(&result),
        "--dot",
        p(&dot),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let value: Value = serde_json::from_str(&fs::read_to_string(&result).unwrap()).unwrap();
    assert_eq!(value["version"], 1);
    assert_eq!(value["corpus"]["n_documents"], 60);
    assert_eq!(value["labels"]["status"], "ok");
    assert_eq!(value["config"]["provider_mode"], "fixtures");
    assert_eq!(value["timings"], serde_json::json!({}));
    let dot = fs::read_to_string(&dot).unwrap();
    assert!(dot.starts_with("digraph metagraph {"));
    let nodes = value["structure"]["data"]["view"]["graph"]["nodes"].as_array().unwrap();
    assert_eq!(dot.matches("shape=").count(), nodes.len());
}

#[test]
fn same_arguments_give_identical_bytes() {
    let dir = fixtures(80);
    let input = dir.path().join("synthetic.txt");
    let mut outputs = Vec::new();
    for (i, jobs) in ["1", "4", "4"].iter().enumerate() {
        let path = dir.path().join(format!("r{i}.json"));
        let out = run(&[
            "analyze", "--input", p(&input), "--fixtures", p(dir.path()), "--jobs", jobs, "--out", p(&path),
        ]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        outputs.push(fs::read(&path).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);
}

#[test]
fn result_goes_to_stdout_without_out() {
    let dir = fixtures(10);
    let out = run(&[
        "analyze", "--input", p(&dir.path().join("synthetic.txt")), "--fixtures", p(dir.path()), "--timings",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let value: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(value["timings"]["total"].as_f64().is_some());
    assert!(stderr(&out).contains("analyzed 10 documents"));
}

#[test]
fn node_threshold_is_echoed() {
    let dir = fixtures(40);
    let out = run(&[
        "analyze", "--input", p(&dir.path().join("synthetic.txt")), "--fixtures", p(dir.path()), "--node-threshold", "1000",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let value: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["structure"]["data"]["view"]["node_threshold"], 1000);
    assert_eq!(value["config"]["node_threshold"], 1000);
}

#[test]
fn conflicting_providers_are_a_usage_error() {
    let out = run(&["analyze", "--text", "a", "--fixtures", ".", "--endpoint", "http://127.0.0.1:1"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("cannot be used with"));
}

#[test]
fn usage_errors() {
    let dir = fixtures(3);
    let fx = p(dir.path());
    let cases: &[&[&str]] = &[
        &["analyze", "--text", "a"],
        &["analyze", "--fixtures", fx],
        &["analyze", "--text", "a", "--input", "x.txt", "--fixtures", fx],
        &["analyze", "--text", "a", "--fixtures", fx, "--threshold", "1.5"],
        &["analyze", "--text", "a", "--fixtures", fx, "--threshold", "abc"],
        &["analyze", "--text", "a", "--fixtures", fx, "--jobs", "0"],
        &["analyze", "--text", "a", "--fixtures", fx, "--cache-dir", fx],
        &["analyze", "--text", "a", "--endpoint", "ftp://host"],
        &["analyze", "--text", "a", "--fixtures", fx, "--node-statistic", "median"],
    ];
    for args in cases {
        let out = run(args);
        assert_eq!(code(&out), 2, "{args:?}: {}", stderr(&out));
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn runtime_errors() {
    let dir = fixtures(3);
    let fx = p(dir.path());
    let missing = dir.path().join("missing.txt");
    let out = run(&["analyze", "--input", p(&missing), "--fixtures", fx]);
    assert_eq!(code(&out), 1);
    let out = run(&["analyze", "--text", "unknown words", "--fixtures", fx]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("all perspectives failed"));
    let out = run(&["analyze", "--text", "a", "--fixtures", p(&missing)]);
    assert_eq!(code(&out), 1);
}

#[test]
fn dry_run_checks_without_writing() {
    let dir = fixtures(20);
    let input = dir.path().join("synthetic.txt");
    let result = dir.path().join("r.json");
    let out = run(&[
        "analyze", "--input", p(&input), "--fixtures", p(dir.path()), "--dry-run", "--out", p(&result),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(!result.exists());
    assert!(stderr(&out).contains("fixtures: complete"));

    let other = dir.path().join("other.txt");
    fs::write(&other, "a headline nobody embedded\n").unwrap();
    let out = run(&["analyze", "--input", p(&other), "--fixtures", p(dir.path()), "--dry-run"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("missing labels fixtures for other.txt:0"), "{}", stderr(&out));
}

#[test]
fn endpoint_falls_back_to_environment() {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}", listener.local_addr().unwrap());
    drop(listener);
    let out = Command::new(BIN)
        .args(["analyze", "--text", "a", "--dry-run"])
        .env("FRAMEFINDER_ENDPOINT", &url)
        .output()
        .unwrap();
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    assert!(stderr(&out).contains("unreachable"));
}

#[test]
fn jsonl_input_keeps_record_ids() {
    let dir = fixtures(5);
    let text = fs::read_to_string(dir.path().join("synthetic.txt")).unwrap();
    let jsonl: String = text
        .lines()
        .enumerate()
        .map(|(i, line)| format!("{}\n", serde_json::json!({"id": format!("synthetic.txt:{i}"), "text": line})))
        .collect();
    let input = dir.path().join("docs.jsonl");
    fs::write(&input, jsonl).unwrap();
    let out = run(&["analyze", "--input", p(&input), "--fixtures", p(dir.path())]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let value: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["corpus"]["split_mode"], "records");
    assert_eq!(value["corpus"]["n_documents"], 5);
}

#[test]
fn parse_amr_round_trips_and_locates_errors() {
    let out = run(&["parse-amr", "--text", "(m / man :ARG0-of (t / teach-01))", "--format", "canonical"]);
    assert_eq!(code(&out), 0);
    let canonical = String::from_utf8(out.stdout).unwrap();
    let out = run(&["parse-amr", "--text", "(x / man :ARG0-of (y / teach-01))", "--format", "canonical"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), canonical);

    let out = run(&["parse-amr", "--text", "(w / want-01 :ARG0 (b / boy) :ARG1 (g / go-02 :ARG0 b))", "--format", "json"]);
    assert_eq!(code(&out), 0);
    let value: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(value["nodes"].as_array().unwrap().len(), 3);
    assert_eq!(value["edges"].as_array().unwrap().len(), 3);

    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("g.amr");
    fs::write(&file, "# ::id ok\n(a / alpha)\n\n# ::id bad\n(b / beta\n   :ARG0 x1)\n").unwrap();
    let out = run(&["parse-amr", p(&file)]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stdout).contains("# ::id ok\n(a / alpha)"));
    assert!(stderr(&out).contains("g.amr:6:10: unbound variable"), "{}", stderr(&out));
}

#[test]
fn validate_fixtures_reports_problems() {
    let dir = fixtures(15);
    let fx = p(dir.path());
    let input = dir.path().join("synthetic.txt");
    let out = run(&["validate-fixtures", "--fixtures", fx, "--input", p(&input)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert!(stderr(&out).contains("loaded 15 label"));

    let out = run(&["validate-fixtures", "--fixtures", fx, "--text", "unseen headline"]);
    assert_eq!(code(&out), 1);

    let labels = dir.path().join("labels.json");
    fs::write(&labels, r#"{"labels": [{"name": "a"}, {"name": "b"}]}"#).unwrap();
    let out = run(&["validate-fixtures", "--fixtures", fx, "--input", p(&input), "--labels-file", p(&labels)]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));

    let broken = dir.path().join("embeddings.jsonl");
    fs::write(&broken, "{not json\n").unwrap();
    let out = run(&["validate-fixtures", "--fixtures", fx]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("embeddings.jsonl"), "{}", stderr(&out));
}

#[test]
fn metagraph_export_reproduces_the_view() {
    let dir = fixtures(50);
    let graph = dir.path().join("meta.json");
    let out = run(&[
        "analyze",
        "--input",
        p(&dir.path().join("synthetic.txt")),
        "--fixtures",
        p(dir.path()),
        "--node-threshold",
        "12",
        "--metagraph",
        p(&graph),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let result: Value = serde_json::from_slice(&out.stdout).unwrap();
    let doc: framefinder_core::metagraph::GraphJson = serde_json::from_str(&fs::read_to_string(&graph).unwrap()).unwrap();
    let meta = framefinder_core::metagraph::MetaGraph::from_graph_json(&doc).unwrap();
    assert_eq!(serde_json::to_value(meta.stats()).unwrap(), result["structure"]["data"]["metagraph"]);
    let view = framefinder_core::report::structure_view(&meta, 12, Default::default());
    assert_eq!(serde_json::to_value(&view).unwrap(), result["structure"]["data"]["view"]);
}
