//! Run a small model × strategy × task grid against a flaky in-process
//! backend, interrupt it halfway, resume it, and show that the result is
//! complete.
//!
//!     cargo run --example mock_grid_run

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use borrowbench::bench::Benchmark;
use borrowbench::gateway::{FailureKind, MockBackend};
use borrowbench::gateway::{Gateway, ModelSpec, RetryPolicy};
use borrowbench::lkg::LkgGraph;
use borrowbench::parse::NormalizationTable;
use borrowbench::prompt::builtin_demos;
use borrowbench::prompt::StrategyRegistry;
use borrowbench::runner::{grid, load_run, run, RunContext, RunOptions};
use borrowbench::Task;

fn main() -> borrowbench::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let bench = Benchmark::load(&data.join("bench.jsonl"))?;
    let graph = LkgGraph::load(&data.join("lkg.json"))?;
    let demos = builtin_demos();
    let registry = StrategyRegistry::default();
    let table = NormalizationTable::default();
    let models = vec![ModelSpec::new("mock/small"), ModelSpec::new("mock/large")];

    let backend = MockBackend::new("FR_LOAN\nThe -éieren suffix is French.").failing_first(1, FailureKind::Transport);
    let gateway = Gateway::new(Arc::new(backend)).with_retry(RetryPolicy::immediate(3));

    let strategies = BTreeMap::from([
        (Task::Classify, vec!["zero_shot".to_string(), "kg_graph".to_string()]),
        (Task::Neology, vec!["minimal".to_string()]),
    ]);
    let cells = grid(&models, &strategies);
    let ctx = RunContext {
        bench: &bench,
        registry: &registry,
        graph: Some(&graph),
        demos: &demos,
        models: &models,
        gateway: &gateway,
        table: &table,
    };

    let out = std::env::temp_dir().join(format!("borrowbench-mock-{}", std::process::id()));
    let first = run(&ctx, &cells, &out, &RunOptions { limit: Some(300), ..RunOptions::default() })?;
    println!("after interruption: {} request(s), complete = {}", first.requests_made(), first.is_complete());

    let second = run(&ctx, &cells, &out, &RunOptions::default())?;
    println!("after resume:       {} request(s), complete = {}", second.requests_made(), second.is_complete());
    for (cell, records) in load_run(&out)? {
        println!("  {cell}: {} records", records.len());
    }
    println!("backend calls: {}, peak in flight: {}", gateway.request_count(), gateway.peak_in_flight());
    std::fs::remove_dir_all(&out).ok();
    Ok(())
}
