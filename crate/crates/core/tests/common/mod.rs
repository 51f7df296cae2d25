#![allow(dead_code)]

use std::path::{Path, PathBuf};

use chrono::{NaiveDate, TimeZone, Utc};

use borrowbench::bench::{instance_id, Benchmark, BenchmarkInstance};
use borrowbench::gateway::CompletionStatus;
use borrowbench::lkg::LkgGraph;
use borrowbench::prompt::{builtin_demos, render, RenderedPrompt, StrategyRegistry};
use borrowbench::runner::{Clock, PredictionRecord};
use borrowbench::{Answer, Era, GoldLabel, NeologyLabel, Task};

/// Benchmark instance the golden prompts are rendered for ("abordéieren").
pub const GOLDEN_INSTANCE: &str = "8214a3b9b68741d2";

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

pub fn shipped_bench() -> Benchmark {
    Benchmark::load(&data_dir().join("bench.jsonl")).expect("shipped benchmark")
}

pub fn shipped_graph() -> LkgGraph {
    LkgGraph::load(&data_dir().join("lkg.json")).expect("shipped graph")
}

pub fn golden_file(strategy: &str, task: Task) -> PathBuf {
    golden_dir().join(format!("{strategy}__{task}.txt"))
}

/// On-disk form of a rendered prompt.
pub fn golden_text(prompt: &RenderedPrompt) -> String {
    format!("[system]\n{}\n\n[user]\n{}\n", prompt.system, prompt.user)
}

/// Every built-in strategy × task prompt for the golden instance.
pub fn golden_prompts() -> Vec<(String, Task, RenderedPrompt)> {
    let bench = shipped_bench();
    let graph = shipped_graph();
    let demos = builtin_demos();
    let registry = StrategyRegistry::default();
    let instance = bench.get(GOLDEN_INSTANCE).expect("golden instance");
    let mut out = Vec::new();
    for name in registry.names() {
        let strategy = registry.get(name).unwrap();
        for task in Task::ALL {
            let prompt = render(instance, strategy, task, Some(&graph), &demos).unwrap();
            out.push((name.to_string(), task, prompt));
        }
    }
    out
}

pub fn fixed_clock() -> Clock {
    let t = Utc.with_ymd_and_hms(2025, 1, 1, 0, 0, 0).unwrap();
    std::sync::Arc::new(move || t)
}

/// A synthetic instance; `n` keeps ids distinct.
pub fn instance(n: usize, gold: GoldLabel, era: Era) -> BenchmarkInstance {
    let sentence = format!("Saz {n} mat Wuert.");
    let published = match era {
        Era::Established => NaiveDate::from_ymd_opt(2010, 1, 1).unwrap(),
        Era::Recent => NaiveDate::from_ymd_opt(2020, 1, 1).unwrap(),
    };
    let start = sentence.chars().count() - 6;
    BenchmarkInstance {
        id: instance_id(&sentence, start, start + 5, published),
        sentence,
        token: "Wuert".into(),
        start,
        end: start + 5,
        gold,
        era,
        neology_gold: gold.neology().unwrap_or(NeologyLabel::Yes),
        morph_evidence: Vec::new(),
        section: String::new(),
        published,
        lemma: None,
        lexicon_complete: false,
    }
}

pub fn record(instance: &BenchmarkInstance, task: Task, answer: Answer) -> PredictionRecord {
    let ok = answer != Answer::NoResponse;
    PredictionRecord {
        instance_id: instance.id.clone(),
        model_id: "test/model".into(),
        strategy: "zero_shot".into(),
        task,
        raw_response: if ok { answer.as_str().to_string() } else { String::new() },
        parsed_label: answer,
        status: if ok { CompletionStatus::Ok } else { CompletionStatus::TransportError },
        prompt_fingerprint: String::new(),
        created_at: Utc.with_ymd_and_hms(2025, 1, 1, 0, 0, 0).unwrap(),
        attempt_count: 1,
    }
}

/// Instances plus one record each, from `(gold, era, answer)` rows.
pub fn fixture(rows: &[(GoldLabel, Era, Answer)], task: Task) -> (Benchmark, Vec<PredictionRecord>) {
    let instances: Vec<_> = rows
        .iter()
        .enumerate()
        .map(|(i, (g, e, _))| instance(i, *g, *e))
        .collect();
    let records = instances
        .iter()
        .zip(rows)
        .map(|(inst, (_, _, a))| record(inst, task, *a))
        .collect();
    (Benchmark::new(instances).unwrap(), records)
}

/// `n` copies of one row.
pub fn rows(n: usize, gold: GoldLabel, era: Era, answer: Answer) -> Vec<(GoldLabel, Era, Answer)> {
    vec![(gold, era, answer); n]
}
