//! Run the gold-oracle grid from the bundled configuration, then score it
//! and print the summary table and the CSV series that were written.
//!
//!     cargo run --example score_run

use std::path::Path;

use borrowbench::bench::Benchmark;
use borrowbench::config::RunConfig;
use borrowbench::lkg::LkgGraph;
use borrowbench::prompt::builtin_demos;
use borrowbench::runner::{gold_oracle_script, run, RunContext, RunOptions};
use borrowbench::scoring::{score_run, ScoreRunOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let config = RunConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/run.toml"))?;
    let bench = Benchmark::load(config.paths.bench.as_ref().expect("bench path"))?;
    let graph = LkgGraph::load(config.paths.graph.as_ref().expect("graph path"))?;
    let registry = config.registry()?;
    let table = config.normalization_table()?;
    let demos = builtin_demos();
    let cells = config.cells();

    let scratch = std::env::temp_dir().join(format!("borrowbench-score-{}", std::process::id()));
    let placeholder = config.gateway(Some(Default::default()))?;
    let mut ctx = RunContext {
        bench: &bench,
        registry: &registry,
        graph: Some(&graph),
        demos: &demos,
        models: &config.models,
        gateway: &placeholder,
        table: &table,
    };
    let gateway = config.gateway(Some(gold_oracle_script(&ctx, &cells)?))?;
    ctx.gateway = &gateway;
    run(&ctx, &cells, &scratch.join("run"), &RunOptions::default())?;

    let reports = score_run(&bench, &scratch.join("run"), &scratch.join("reports"), &ScoreRunOptions::default())?;
    for r in &reports {
        println!(
            "{:<50} acc {:>5.1}  parse errors {:>3}",
            r.cell.to_string(),
            borrowbench::scoring::points(r.report.accuracy),
            r.report.parse_errors
        );
    }
    let summary = std::fs::read_to_string(scratch.join("reports/summary.csv"))?;
    println!("\nsummary.csv:\n{summary}");
    std::fs::remove_dir_all(&scratch).ok();
    Ok(())
}
