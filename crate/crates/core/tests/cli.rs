//! The `borrowbench` binary, driven as a user would.

mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use borrowbench::runner::load_records;
use borrowbench::Answer;

fn bench_bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_borrowbench"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = bench_bin(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn shipped_benchmark_and_graph_regenerate_identically() {
    let data = common::data_dir();
    let tmp = tempfile::tempdir().unwrap();
    let bench = tmp.path().join("bench.jsonl");
    ok(&[
        "build-bench",
        "--corpus",
        p(&data.join("corpus_sample.jsonl")),
        "--out",
        p(&bench),
        "--per-class",
        "40",
        "--diagnostic",
        "10",
        "--seed",
        "7",
        "--lexicon",
        p(&data.join("lexicon.jsonl")),
        "--function-words",
        p(&data.join("function_words.txt")),
    ]);
    assert_eq!(fs::read(&bench).unwrap(), fs::read(data.join("bench.jsonl")).unwrap());

    let graph = tmp.path().join("lkg.json");
    ok(&[
        "ingest-kg",
        "--patterns",
        p(&data.join("patterns.tsv")),
        "--lexicon",
        p(&data.join("lexicon.jsonl")),
        "--synonyms",
        p(&data.join("synonyms.tsv")),
        "--out",
        p(&graph),
    ]);
    assert_eq!(fs::read(&graph).unwrap(), fs::read(data.join("lkg.json")).unwrap());
}

#[test]
fn render_context_and_render() {
    let data = common::data_dir();
    let text = ok(&["render-context", "--graph", p(&data.join("lkg.json")), "--token", "abordéieren"]);
    assert!(text.contains("aborder -> [fr_eieren"), "{text}");
    let text = ok(&[
        "render-context",
        "--graph",
        p(&data.join("lkg.json")),
        "--token",
        "abordéieren",
        "--ablate",
        "lex_only",
    ]);
    assert!(text.starts_with("lexicon:") && !text.contains("etymology: aborder"), "{text}");

    let text = ok(&[
        "render",
        "--bench",
        p(&data.join("bench.jsonl")),
        "--graph",
        p(&data.join("lkg.json")),
        "--id",
        common::GOLDEN_INSTANCE,
        "--strategy",
        "kg_graph",
        "--task",
        "classify",
    ]);
    let golden = fs::read_to_string(common::golden_file("kg_graph", borrowbench::Task::Classify)).unwrap();
    let user = golden.split("[user]\n").nth(1).unwrap();
    assert!(text.contains(user.trim_end()), "{text}");
}

#[test]
fn run_parse_score_report() {
    let data = common::data_dir();
    let tmp = tempfile::tempdir().unwrap();
    let run_dir = tmp.path().join("run");
    let config = data.join("run.toml");
    let filter = "model=google/gemma-3-12b-it";

    // A limited run stops early and says so with exit code 3.
    let partial = bench_bin(&["run", "--config", p(&config), "--out", p(&run_dir), "--cells", filter, "--limit", "50"]);
    assert_eq!(partial.status.code(), Some(3), "{}", String::from_utf8_lossy(&partial.stderr));

    ok(&["run", "--config", p(&config), "--out", p(&run_dir), "--cells", filter]);
    let files: Vec<_> = fs::read_dir(&run_dir).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(files.len(), 10);
    assert!(files.iter().all(|f| f.file_name().unwrap().to_str().unwrap().starts_with("google-gemma-3-12b-it__")));

    // Corrupt one parsed label, then re-parse it back.
    let file = run_dir.join("google-gemma-3-12b-it__zero_shot__classify.jsonl");
    let text = fs::read_to_string(&file).unwrap();
    let first = text.lines().next().unwrap();
    let gold = load_records(&file).unwrap()[0].parsed_label;
    let broken = first.replacen(&format!("\"parsed_label\":\"{}\"", gold.as_str()), "\"parsed_label\":\"PARSE_ERROR\"", 1);
    assert_ne!(broken, first);
    fs::write(&file, text.replacen(first, &broken, 1)).unwrap();
    assert_eq!(load_records(&file).unwrap()[0].parsed_label, Answer::ParseError);
    let line = ok(&["parse", "--in", p(&file), "--rewrite"]);
    assert!(line.trim_end().ends_with("\t0"), "{line}");
    assert_eq!(load_records(&file).unwrap()[0].parsed_label, gold);

    let reports = tmp.path().join("reports");
    ok(&["score", "--bench", p(&data.join("bench.jsonl")), "--run", p(&run_dir), "--out", p(&reports)]);
    for csv in [
        "summary.csv",
        "per_class_f1.csv",
        "confusion_pairs.csv",
        "native_fp_rates.csv",
        "ablation_grid.csv",
        "delta_kg.csv",
        "en_distractor.csv",
    ] {
        assert!(reports.join(csv).exists(), "{csv} missing");
    }
    let table = ok(&["report", "--reports", p(&reports)]);
    assert_eq!(table.lines().filter(|l| l.starts_with("| google/gemma-3-12b-it")).count(), 10);
    assert!(table.contains("100.0"));
}

#[test]
fn usage_errors_exit_with_2_and_failures_with_1() {
    assert_eq!(bench_bin(&["score", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(bench_bin(&["frobnicate"]).status.code(), Some(2));
    let missing = bench_bin(&["render-context", "--graph", "/nonexistent/lkg.json", "--token", "x"]);
    assert_eq!(missing.status.code(), Some(1));
    assert!(!missing.stderr.is_empty());
    assert!(bench_bin(&["--version"]).status.success());
    assert!(bench_bin(&["--help"]).status.success());
}

#[test]
fn shipped_configs_load() {
    let data = common::data_dir();
    let offline = borrowbench::config::RunConfig::load(&data.join("run.toml")).unwrap();
    assert_eq!(offline.cells().len(), 20);
    let live = borrowbench::config::RunConfig::load(&data.join("openrouter.toml")).unwrap();
    assert_eq!(live.registry().unwrap().len(), 11);
    assert_eq!(live.cells().len(), 3 * 11 * 2);
    assert!(live.models.iter().all(|m| m.auth.as_deref() == Some("OPENROUTER_API_KEY")));
}
