use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};
use std::time::{Duration, Instant};

use dialect_audit::table::{read_score_table, write_score_table, ScoreRow, ScoreTable};
use dialect_audit_core::{DialectGroup, Label, LabelScores, PerLabel, Post, ReferenceScorer, Scorer};

const BIN: &str = env!("CARGO_BIN_EXE_dialect-audit");

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/corpus200.tsv")
}

fn run(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    Command::new(BIN).args(args.iter().map(|a| a.as_ref())).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn assert_ok(out: &Output) {
    assert_eq!(code(out), 0, "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn table_with_toxicity(path: &Path, group: DialectGroup, tox: &[f64]) {
    let rows = tox
        .iter()
        .enumerate()
        .map(|(i, &t)| ScoreRow {
            post: Post::new(&format!("p{i}"), 0.5, 0.5).unwrap(),
            scores: PerLabel::from_fn(|l| if l == Label::Toxicity { t } else { 0.0 }),
        })
        .collect();
    write_score_table(&ScoreTable { group, scorer: None, rows }, path).unwrap();
}

#[test]
fn version_and_help_exit_zero() {
    let out = run(&[&"--version"]);
    assert_ok(&out);
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), format!("dialect-audit {}", env!("CARGO_PKG_VERSION")));
    let out = run(&[&"sweep", &"--help"]);
    assert_ok(&out);
    assert!(String::from_utf8(out.stdout).unwrap().contains("--grid"));
}

#[test]
fn usage_and_input_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("c.jsonl");
    assert_eq!(code(&run(&[])), 2);
    assert_eq!(code(&run(&[&"frobnicate"])), 2);
    let missing = run(&[&"ingest", &"--input", &"/nonexistent.tsv", &"--group", &"AAE", &"-o", &out_path]);
    assert_eq!(code(&missing), 2);
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/nonexistent.tsv"));
    let bad_group = run(&[&"ingest", &"--input", &fixture(), &"--group", &"XYZ", &"-o", &out_path]);
    assert_eq!(code(&bad_group), 2);
    let bad_threshold =
        run(&[&"ingest", &"--input", &fixture(), &"--group", &"AAE", &"-o", &out_path, &"--threshold", &"0.3"]);
    assert_eq!(code(&bad_threshold), 2);
    let bad_grid = run(&[&"sweep", &"--aae", &out_path, &"--grid", &"1:0:0.1"]);
    assert_eq!(code(&bad_grid), 2);
    assert!(!out_path.exists());
}

#[test]
fn ingest_writes_sample_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("aae.jsonl");
    let out = run(&[&"ingest", &"--input", &fixture(), &"--group", &"aae", &"--sample-size", &"5", &"--seed", &"42", &"-o", &out_path]);
    assert_ok(&out);
    assert!(out.stdout.is_empty(), "data goes to files, not stdout");
    let jsonl = std::fs::read_to_string(&out_path).unwrap();
    assert_eq!(jsonl.lines().count(), 5);
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("aae.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["sample_seed"], 42);
    assert_eq!(manifest["counts"]["total_rows"], 200);
}

#[test]
fn score_matches_reference_and_rejects_empty_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("sae.jsonl");
    let scores = dir.path().join("sae.csv");
    assert_ok(&run(&[&"ingest", &"--input", &fixture(), &"--group", &"SAE", &"--sample-size", &"10", &"-o", &corpus]));
    assert_ok(&run(&[&"score", &"--corpus", &corpus, &"-o", &scores]));
    let table = read_score_table(&scores).unwrap();
    assert_eq!(table.len(), 10);
    assert_eq!(table.group, DialectGroup::Sae);
    assert!(table.scorer.as_deref().unwrap().starts_with("reference:"));
    let reference = ReferenceScorer::default();
    for row in &table.rows {
        assert_eq!(reference.score(row.post.text()).unwrap(), row.scores);
    }

    std::fs::write(&corpus, "").unwrap();
    let out = run(&[&"score", &"--corpus", &corpus, &"-o", &dir.path().join("empty.csv")]);
    assert_eq!(code(&out), 2);
    let out = run(&[&"score", &"--corpus", &dir.path().join("none.jsonl"), &"-o", &scores]);
    assert_eq!(code(&out), 2);
    let out = run(&[&"score", &"--corpus", &corpus, &"-o", &scores, &"--model", &"/nonexistent/model.onnx"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn sweep_counts_strictly_above_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let aae = dir.path().join("aae.csv");
    table_with_toxicity(&aae, DialectGroup::Aae, &[0.2, 0.6, 0.9]);
    let out = run(&[&"sweep", &"--aae", &aae, &"--grid", &"0:1:0.5"]);
    assert_ok(&out);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "threshold,aae_fpr\n0,1\n0.5,0.6666666666666666\n1,0\n");

    let csv = dir.path().join("fpr.csv");
    assert_ok(&run(&[&"sweep", &"--aae", &aae, &"--sae", &aae, &"-o", &csv]));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 1 + 101);
    assert!(text.lines().any(|l| l == "0.07,1,1"));
}

#[test]
fn sweep_preserves_stochastic_dominance() {
    let dir = tempfile::tempdir().unwrap();
    let (aae, sae) = (dir.path().join("aae.csv"), dir.path().join("sae.csv"));
    let base: Vec<f64> = (0..97).map(|i| (i as f64 * 0.37) % 1.0 * 0.8).collect();
    let shifted: Vec<f64> = base.iter().map(|s| (s + 0.15).min(1.0)).collect();
    table_with_toxicity(&sae, DialectGroup::Sae, &base);
    table_with_toxicity(&aae, DialectGroup::Aae, &shifted);
    let out = run(&[&"sweep", &"--aae", &aae, &"--sae", &sae]);
    assert_ok(&out);
    for line in String::from_utf8(out.stdout).unwrap().lines().skip(1) {
        let v: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert!(v[1] >= v[2], "{line}");
    }
}

fn pipeline(dir: &Path, extra_report: &[&str]) -> Vec<(String, Vec<u8>)> {
    let f = |n: &str| dir.join(n);
    for g in ["aae", "sae"] {
        assert_ok(&run(&[&"ingest", &"--input", &fixture(), &"--group", &g, &"--sample-size", &"25", &"--seed", &"7", &"-o", &f(&format!("{g}.jsonl"))]));
        assert_ok(&run(&[&"score", &"--corpus", &f(&format!("{g}.jsonl")), &"-o", &f(&format!("{g}.csv"))]));
    }
    let mut args: Vec<&dyn AsRef<std::ffi::OsStr>> = Vec::new();
    let (aae, sae, rep, plot, md) = (f("aae.csv"), f("sae.csv"), f("report.json"), f("plot"), f("report.md"));
    args.extend([&"report" as &dyn AsRef<std::ffi::OsStr>, &"--aae", &aae, &"--sae", &sae, &"-o", &rep, &"--plot-dir", &plot, &"--markdown", &md]);
    for a in extra_report {
        args.push(a);
    }
    assert_ok(&run(&args));
    assert_ok(&run(&[&"sweep", &"--aae", &aae, &"--sae", &sae, &"-o", &f("fpr.csv")]));
    let mut files: Vec<(String, Vec<u8>)> = Vec::new();
    for name in ["aae.jsonl", "aae.manifest.json", "sae.jsonl", "aae.csv", "sae.csv", "report.json", "report.md", "fpr.csv", "plot/fpr.csv", "plot/box.csv", "plot/histogram.csv", "plot/means.csv"] {
        files.push((name.to_string(), std::fs::read(dir.join(name)).unwrap()));
    }
    files
}

#[test]
fn full_pipeline_is_fast_and_idempotent() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let start = Instant::now();
    let first = pipeline(a.path(), &["--claim", "toxicity=1.8"]);
    assert!(start.elapsed() < Duration::from_secs(5), "pipeline took {:?}", start.elapsed());
    let second = pipeline(b.path(), &["--claim", "toxicity=1.8"]);
    for ((name, x), (_, y)) in first.iter().zip(&second) {
        assert!(x == y, "{name} differs between runs");
    }
    // Re-running in place overwrites with identical bytes.
    let third = pipeline(a.path(), &["--claim", "toxicity=1.8"]);
    assert_eq!(first, third);
    let md = String::from_utf8(first.iter().find(|(n, _)| n == "report.md").unwrap().1.clone()).unwrap();
    assert!(md.contains("1.8x"), "{md}");
}

#[test]
fn audit_subcommand_writes_everything() {
    let dir = tempfile::tempdir().unwrap();
    let f = |n: &str| dir.path().join(n);
    for g in ["aae", "sae"] {
        assert_ok(&run(&[&"ingest", &"--input", &fixture(), &"--group", &g, &"--sample-size", &"20", &"-o", &f(&format!("{g}.jsonl"))]));
    }
    let out = f("out");
    assert_ok(&run(&[&"audit", &"--aae", &f("aae.jsonl"), &"--sae", &f("sae.jsonl"), &"-o", &out, &"--timestamp", &"2026-01-01T00:00:00Z"]));
    for name in ["aae_scores.csv", "sae_scores.csv", "report.json", "plot/fpr.csv"] {
        assert!(out.join(name).is_file(), "{name}");
    }
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["metadata"]["timestamp"], "2026-01-01T00:00:00Z");
    assert_eq!(report["metadata"]["corpora"].as_array().unwrap().len(), 2);
    // swapped corpora are an input error
    let out2 = f("out2");
    let res = run(&[&"audit", &"--aae", &f("sae.jsonl"), &"--sae", &f("aae.jsonl"), &"-o", &out2]);
    assert_eq!(code(&res), 2);
    assert!(!out2.exists());
}

#[test]
fn config_file_sits_between_flags_and_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("audit.toml");
    std::fs::write(&config, "seed = 3\n[ingest]\nsample_size = 7\n").unwrap();
    let out_path = dir.path().join("c.jsonl");
    let input = fixture();
    let ingest = |extra: &[&str]| {
        let mut args: Vec<&dyn AsRef<std::ffi::OsStr>> = vec![&"--config", &config, &"ingest", &"--input", &input, &"--group", &"AAE", &"-o", &out_path];
        for e in extra {
            args.push(e);
        }
        let out = run(&args);
        assert_ok(&out);
        std::fs::read_to_string(&out_path).unwrap().lines().count()
    };
    assert_eq!(ingest(&[]), 7);
    assert_eq!(ingest(&["--sample-size", "3"]), 3);
    let manifest = std::fs::read_to_string(dir.path().join("c.manifest.json")).unwrap();
    assert!(manifest.contains("\"sample_seed\": 3"), "{manifest}");

    let json_config = dir.path().join("audit.json");
    std::fs::write(&json_config, r#"{"ingest": {"sample_size": 4}}"#).unwrap();
    let out = run(&[&"--config", &json_config, &"ingest", &"--input", &fixture(), &"--group", &"AAE", &"-o", &out_path]);
    assert_ok(&out);
    assert_eq!(std::fs::read_to_string(&out_path).unwrap().lines().count(), 4);

    std::fs::write(&config, "[ingest]\nsampel_size = 7\n").unwrap();
    let out = run(&[&"--config", &config, &"ingest", &"--input", &fixture(), &"--group", &"AAE", &"-o", &out_path]);
    assert_eq!(code(&out), 2);
}

#[test]
fn serve_answers_health_over_tcp() {
    let mut child = Command::new(BIN)
        .args(["serve", "--port", "0"])
        .stderr(Stdio::piped())
        .stdout(Stdio::null())
        .spawn()
        .unwrap();
    let mut stderr = BufReader::new(child.stderr.take().unwrap());
    let mut addr = None;
    let mut line = String::new();
    while stderr.read_line(&mut line).unwrap() > 0 {
        if let Some(rest) = line.split("listening on http://").nth(1) {
            addr = Some(rest.trim().to_string());
            break;
        }
        line.clear();
    }
    let addr = addr.expect("server announced its address");
    let mut stream = TcpStream::connect(&addr).unwrap();
    write!(stream, "GET /api/health HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n").unwrap();
    let mut response = String::new();
    stream.read_to_string(&mut response).unwrap();
    child.kill().unwrap();
    child.wait().unwrap();
    assert!(response.starts_with("HTTP/1.1 200"), "{response}");
    assert!(response.contains("\"backend\":\"reference\""), "{response}");
}

#[test]
fn scores_are_written_at_full_precision() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    let scores = LabelScores::from_array([0.1, 1.0 / 3.0, 0.2, 0.0, 1.0, 0.5]).unwrap();
    let row = ScoreRow { post: Post::new("x", 0.9, 0.1).unwrap(), scores };
    write_score_table(&ScoreTable { group: DialectGroup::Aae, scorer: None, rows: vec![row] }, &path).unwrap();
    assert_eq!(read_score_table(&path).unwrap().rows[0].scores, scores);
}
