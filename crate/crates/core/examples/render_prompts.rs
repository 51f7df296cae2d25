//! Render one benchmark instance under every built-in strategy and both
//! tasks.
//!
//!     cargo run --example render_prompts -- [instance index]

use std::path::Path;

use borrowbench::bench::Benchmark;
use borrowbench::lkg::LkgGraph;
use borrowbench::prompt::builtin_demos;
use borrowbench::prompt::render;
use borrowbench::prompt::StrategyRegistry;
use borrowbench::{GoldLabel, Task};

fn main() -> borrowbench::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let bench = Benchmark::load(&data.join("bench.jsonl"))?;
    let graph = LkgGraph::load(&data.join("lkg.json"))?;
    let demos = builtin_demos();
    let registry = StrategyRegistry::default();

    let index: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let instance = &bench.instances()[index % bench.len()];
    println!("instance {} ({}): {}", instance.id, instance.gold, instance.token);

    println!("\n---- system ----\n{}", borrowbench::prompt::system_message());
    for name in registry.names() {
        let strategy = registry.get(name)?;
        for task in [Task::Classify, Task::Neology] {
            if task == Task::Neology && instance.gold == GoldLabel::CodeSwitch {
                continue;
            }
            let prompt = render(instance, strategy, task, Some(&graph), &demos)?;
            println!("\n---- {name} / {task} [{}] ----\n{}", &prompt.fingerprint[..12], prompt.user);
        }
    }
    Ok(())
}
