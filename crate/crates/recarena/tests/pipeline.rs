//! End-to-end CLI behavior: each test drives the same entry point as the
//! installed binary, but in-process against a temp directory.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use recarena::verdict::{read_verdict_lines, VerdictLine};

fn run_cli(args: &[&str]) -> i32 {
    recarena::cli::run(std::iter::once("recarena").chain(args.iter().copied()))
}

struct Workspace {
    _dir: tempfile::TempDir,
    root: PathBuf,
}

impl Workspace {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        Workspace { _dir: dir, root }
    }

    fn path(&self, name: &str) -> String {
        self.root.join(name).to_string_lossy().into_owned()
    }

    fn ingest_toy(&self) -> String {
        let corpus = self.path("corpus.json");
        assert_eq!(run_cli(&["ingest", "--format", "toy", "--out", &corpus]), 0);
        corpus
    }

    fn graded(&self, corpus: &str, system_id: &str, quality: &str) -> String {
        let out = self.path(&format!("{system_id}.jsonl"));
        assert_eq!(
            run_cli(&[
                "recommend", "--corpus", corpus, "--method", "graded", "--quality", quality,
                "--system-id", system_id, "--out", &out,
            ]),
            0
        );
        out
    }

    fn judge_mock(&self, corpus: &str, list_a: &str, list_b: &str, out_name: &str) -> String {
        let out = self.path(out_name);
        assert_eq!(
            run_cli(&[
                "judge", "--corpus", corpus, "--list-a", list_a, "--list-b", list_b,
                "--provider", "mock", "--out", &out,
            ]),
            0
        );
        out
    }
}

fn read(path: &str) -> Vec<u8> {
    std::fs::read(path).unwrap()
}

#[test]
fn ingest_rerun_is_byte_identical() {
    let ws = Workspace::new();
    let first = ws.ingest_toy();
    let bytes = read(&first);
    assert_eq!(run_cli(&["ingest", "--format", "toy", "--out", &first]), 0);
    assert_eq!(bytes, read(&first));
}

#[test]
fn unknown_ingest_format_is_an_input_error() {
    let ws = Workspace::new();
    let out = ws.path("corpus.json");
    assert_eq!(run_cli(&["ingest", "--format", "parquet", "--out", &out]), 2);
    assert!(!Path::new(&out).exists());
}

#[test]
fn help_and_usage_errors() {
    assert_eq!(run_cli(&["--help"]), 0);
    assert_eq!(run_cli(&["judge", "--help"]), 0);
    assert_eq!(run_cli(&["frobnicate"]), 2);
    assert_eq!(run_cli(&["ingest"]), 2);
}

#[test]
fn mock_judge_is_deterministic() {
    let ws = Workspace::new();
    let corpus = ws.ingest_toy();
    let alpha = ws.graded(&corpus, "alpha", "0.9");
    let beta = ws.graded(&corpus, "beta", "0.2");
    let first = ws.judge_mock(&corpus, &alpha, &beta, "v1.jsonl");
    let second = ws.judge_mock(&corpus, &alpha, &beta, "v2.jsonl");
    assert_eq!(read(&first), read(&second));
}

#[test]
fn judge_rejects_identical_systems() {
    let ws = Workspace::new();
    let corpus = ws.ingest_toy();
    let alpha = ws.graded(&corpus, "alpha", "0.9");
    let out = ws.path("v.jsonl");
    assert_eq!(
        run_cli(&[
            "judge", "--corpus", &corpus, "--list-a", &alpha, "--list-b", &alpha,
            "--provider", "mock", "--out", &out,
        ]),
        2
    );
}

#[test]
fn debias_swap_reconciles_to_single_pass_on_symmetric_judge() {
    let ws = Workspace::new();
    let corpus = ws.ingest_toy();
    let alpha = ws.graded(&corpus, "alpha", "0.9");
    let beta = ws.graded(&corpus, "beta", "0.2");
    let plain = ws.judge_mock(&corpus, &alpha, &beta, "plain.jsonl");
    let swapped = ws.path("swapped.jsonl");
    assert_eq!(
        run_cli(&[
            "judge", "--corpus", &corpus, "--list-a", &alpha, "--list-b", &beta,
            "--provider", "mock", "--debias", "swap", "--out", &swapped,
        ]),
        0
    );

    let plain_lines = read_verdict_lines(Path::new(&plain)).unwrap();
    let swap_lines = read_verdict_lines(Path::new(&swapped)).unwrap();
    assert_eq!(plain_lines.len(), swap_lines.len());
    for (p, s) in plain_lines.iter().zip(&swap_lines) {
        let (VerdictLine::Verdict(p), VerdictLine::Verdict(s)) = (p, s) else {
            panic!("mock judging produced a failure line");
        };
        assert!(!p.verdict.swap_corrected);
        assert!(s.verdict.swap_corrected, "reconciled verdicts must be marked");
        assert_eq!(p.verdict.user_id, s.verdict.user_id);
        assert_eq!(p.verdict.overall, s.verdict.overall);
        assert_eq!(p.verdict.per_dimension, s.verdict.per_dimension);
    }
}

#[test]
fn sampling_is_deterministic_per_seed() {
    let ws = Workspace::new();
    let corpus = ws.ingest_toy();
    let alpha = ws.graded(&corpus, "alpha", "0.9");
    let beta = ws.graded(&corpus, "beta", "0.2");
    let mut users_by_run = Vec::new();
    for name in ["s1.jsonl", "s2.jsonl"] {
        let out = ws.path(name);
        assert_eq!(
            run_cli(&[
                "judge", "--corpus", &corpus, "--list-a", &alpha, "--list-b", &beta,
                "--provider", "mock", "--sample", "10", "--seed", "7", "--out", &out,
            ]),
            0
        );
        let lines = read_verdict_lines(Path::new(&out)).unwrap();
        assert_eq!(lines.len(), 10);
        let users: BTreeSet<String> = lines
            .iter()
            .map(|line| match line {
                VerdictLine::Verdict(v) => v.verdict.user_id.clone(),
                VerdictLine::Failure(f) => f.user_id.clone(),
            })
            .collect();
        users_by_run.push(users);
    }
    assert_eq!(users_by_run[0], users_by_run[1]);
    assert_eq!(read(&ws.path("s1.jsonl")), read(&ws.path("s2.jsonl")));

    let other = ws.path("s3.jsonl");
    assert_eq!(
        run_cli(&[
            "judge", "--corpus", &corpus, "--list-a", &alpha, "--list-b", &beta,
            "--provider", "mock", "--sample", "10", "--seed", "8", "--out", &other,
        ]),
        0
    );
    let lines = read_verdict_lines(Path::new(&other)).unwrap();
    let users: BTreeSet<String> = lines
        .iter()
        .map(|line| match line {
            VerdictLine::Verdict(v) => v.verdict.user_id.clone(),
            VerdictLine::Failure(f) => f.user_id.clone(),
        })
        .collect();
    assert_ne!(users, users_by_run[0], "a different seed should pick a different subset");
}

#[test]
fn metrics_output_uses_k_in_the_ndcg_key() {
    let ws = Workspace::new();
    let corpus = ws.ingest_toy();
    let alpha = ws.graded(&corpus, "alpha", "0.9");
    let out = ws.path("metrics.json");
    assert_eq!(
        run_cli(&[
            "metrics", "--corpus", &corpus, "--lists", &alpha, "--k", "5", "--out", &out,
        ]),
        0
    );
    let parsed: serde_json::Value = serde_json::from_slice(&read(&out)).unwrap();
    let alpha_metrics = &parsed["systems"]["alpha"];
    assert!(alpha_metrics.get("ndcg@5").is_some(), "missing ndcg@5 in {parsed}");
    assert!(alpha_metrics.get("urd").is_some());
    assert_eq!(parsed["k"], 5);
}

#[test]
fn metrics_requires_some_input() {
    let ws = Workspace::new();
    let corpus = ws.ingest_toy();
    let out = ws.path("metrics.json");
    assert_eq!(run_cli(&["metrics", "--corpus", &corpus, "--out", &out]), 2);
}

/// Four challengers at distinct quality levels against one shared random
/// baseline produce four distinct finite Q values, so ranks must be 1..4
/// with no ties.
#[test]
fn report_ranks_four_systems() {
    let ws = Workspace::new();
    let corpus = ws.ingest_toy();
    let base = ws.path("base.jsonl");
    assert_eq!(
        run_cli(&[
            "recommend", "--corpus", &corpus, "--method", "random", "--seed", "11",
            "--system-id", "base", "--out", &base,
        ]),
        0
    );
    let mut verdict_args = vec!["report".to_string()];
    for (system, quality) in [("g1", "0.8"), ("g2", "0.6"), ("g3", "0.4"), ("g4", "0.2")] {
        let lists = ws.graded(&corpus, system, quality);
        let verdicts = ws.judge_mock(&corpus, &lists, &base, &format!("v_{system}.jsonl"));
        verdict_args.push("--verdicts".to_string());
        verdict_args.push(verdicts);
    }
    let out_dir = ws.path("report");
    verdict_args.extend(["--out-dir".to_string(), out_dir.clone()]);
    let args: Vec<&str> = verdict_args.iter().map(String::as_str).collect();
    assert_eq!(run_cli(&args), 0);

    let report: recarena::arena::ArenaReport =
        serde_json::from_slice(&read(&format!("{out_dir}/report.json"))).unwrap();
    assert_eq!(report.baseline_id.as_deref(), Some("base"));
    assert_eq!(report.ranking.len(), 4);
    let ranks: Vec<usize> = report.ranking.iter().map(|r| r.rank).collect();
    assert_eq!(ranks, vec![1, 2, 3, 4]);
    assert!(report.ranking.iter().all(|r| !r.tied));
    let by_rank: Vec<&str> =
        report.ranking.iter().map(|r| r.system_id.as_str()).collect();
    assert_eq!(by_rank, vec!["g1", "g2", "g3", "g4"], "quality order should drive rank order");

    let markdown = String::from_utf8(read(&format!("{out_dir}/report.md"))).unwrap();
    for system in ["g1", "g2", "g3", "g4"] {
        assert!(markdown.contains(&format!("| {system} |")));
    }
    assert!(Path::new(&format!("{out_dir}/tallies.csv")).exists());
    assert!(Path::new(&format!("{out_dir}/run_config.json")).exists());
}

#[test]
fn correlation_is_omitted_below_three_systems() {
    let ws = Workspace::new();
    let corpus = ws.ingest_toy();
    let base = ws.path("base.jsonl");
    assert_eq!(
        run_cli(&[
            "recommend", "--corpus", &corpus, "--method", "random", "--seed", "11",
            "--system-id", "base", "--out", &base,
        ]),
        0
    );
    let g1 = ws.graded(&corpus, "g1", "0.8");
    let g2 = ws.graded(&corpus, "g2", "0.4");
    let v1 = ws.judge_mock(&corpus, &g1, &base, "v1.jsonl");
    let v2 = ws.judge_mock(&corpus, &g2, &base, "v2.jsonl");

    let metrics = ws.path("metrics.json");
    assert_eq!(
        run_cli(&[
            "metrics", "--corpus", &corpus, "--lists", &g1, "--lists", &g2, "--k", "5",
            "--out", &metrics,
        ]),
        0
    );

    let out_dir = ws.path("report");
    assert_eq!(
        run_cli(&[
            "report", "--verdicts", &v1, "--verdicts", &v2, "--metrics", &metrics,
            "--correlate", "ndcg@5", "--out-dir", &out_dir,
        ]),
        0,
        "too few systems must degrade to a warning, not an error"
    );
    let report: recarena::arena::ArenaReport =
        serde_json::from_slice(&read(&format!("{out_dir}/report.json"))).unwrap();
    assert!(report.correlation.is_none());
    assert_eq!(report.ranking.len(), 2);
}

#[test]
fn correlation_is_reported_with_enough_systems() {
    let ws = Workspace::new();
    let corpus = ws.ingest_toy();
    let base = ws.path("base.jsonl");
    assert_eq!(
        run_cli(&[
            "recommend", "--corpus", &corpus, "--method", "random", "--seed", "11",
            "--system-id", "base", "--out", &base,
        ]),
        0
    );
    let mut verdict_args = vec!["report".to_string()];
    let mut list_args = Vec::new();
    for (system, quality) in [("g1", "0.8"), ("g2", "0.6"), ("g3", "0.4"), ("g4", "0.2")] {
        let lists = ws.graded(&corpus, system, quality);
        let verdicts = ws.judge_mock(&corpus, &lists, &base, &format!("v_{system}.jsonl"));
        verdict_args.push("--verdicts".to_string());
        verdict_args.push(verdicts);
        list_args.push(lists);
    }
    let metrics = ws.path("metrics.json");
    let mut metrics_args =
        vec!["metrics".to_string(), "--corpus".to_string(), corpus.clone()];
    for lists in &list_args {
        metrics_args.push("--lists".to_string());
        metrics_args.push(lists.clone());
    }
    metrics_args.extend(["--k".to_string(), "5".to_string(), "--out".to_string(), metrics.clone()]);
    let args: Vec<&str> = metrics_args.iter().map(String::as_str).collect();
    assert_eq!(run_cli(&args), 0);

    let out_dir = ws.path("report");
    verdict_args.extend([
        "--metrics".to_string(),
        metrics,
        "--correlate".to_string(),
        "ndcg@5".to_string(),
        "--out-dir".to_string(),
        out_dir.clone(),
    ]);
    let args: Vec<&str> = verdict_args.iter().map(String::as_str).collect();
    assert_eq!(run_cli(&args), 0);

    let report: recarena::arena::ArenaReport =
        serde_json::from_slice(&read(&format!("{out_dir}/report.json"))).unwrap();
    let correlation = report.correlation.expect("correlation with 4 systems");
    assert_eq!(correlation.metric, "ndcg@5");
    assert_eq!(correlation.result.n, 4);
    assert!(correlation.result.r > 0.5, "quality-ordered Qs should track ndcg, got {}", correlation.result.r);
    let markdown = String::from_utf8(read(&format!("{out_dir}/report.md"))).unwrap();
    assert!(markdown.contains("## Correlation vs ndcg@5"));
}

#[test]
fn config_file_drives_defaults_and_flags_override() {
    let ws = Workspace::new();
    let corpus = ws.ingest_toy();
    let config = ws.path("run.json");
    std::fs::write(&config, r#"{"k": 3}"#).unwrap();

    let out = ws.path("short.jsonl");
    assert_eq!(
        run_cli(&[
            "recommend", "--config", &config, "--corpus", &corpus, "--method", "graded",
            "--quality", "0.9", "--system-id", "alpha", "--out", &out,
        ]),
        0
    );
    let corpus_data = recarena::corpus::Corpus::read_canonical(Path::new(&corpus)).unwrap();
    let lists = recarena::corpus::read_reclists(Path::new(&out), &corpus_data).unwrap();
    assert!(lists.iter().all(|l| l.items.len() == 3));

    let out = ws.path("long.jsonl");
    assert_eq!(
        run_cli(&[
            "recommend", "--config", &config, "--corpus", &corpus, "--method", "graded",
            "--quality", "0.9", "--system-id", "alpha", "--k", "4", "--out", &out,
        ]),
        0
    );
    let lists = recarena::corpus::read_reclists(Path::new(&out), &corpus_data).unwrap();
    assert!(lists.iter().all(|l| l.items.len() == 4));

    let bad_config = ws.path("bad.json");
    std::fs::write(&bad_config, r#"{"k": 0}"#).unwrap();
    let out = ws.path("never.jsonl");
    assert_eq!(
        run_cli(&[
            "recommend", "--config", &bad_config, "--corpus", &corpus, "--method", "graded",
            "--quality", "0.9", "--system-id", "alpha", "--out", &out,
        ]),
        2
    );
}

#[test]
fn judge_writes_a_config_manifest() {
    let ws = Workspace::new();
    let corpus = ws.ingest_toy();
    let alpha = ws.graded(&corpus, "alpha", "0.9");
    let beta = ws.graded(&corpus, "beta", "0.2");
    ws.judge_mock(&corpus, &alpha, &beta, "verdicts.jsonl");
    let manifest = read(&ws.path("verdicts.config.json"));
    let parsed: serde_json::Value = serde_json::from_slice(&manifest).unwrap();
    assert_eq!(parsed["k"], 5);
    assert_eq!(parsed["debias"], "none");
}
