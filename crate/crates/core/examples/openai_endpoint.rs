//! Send one rendered prompt to an OpenAI-compatible endpoint.
//!
//!     OPENROUTER_API_KEY=... cargo run --example openai_endpoint -- [model] [endpoint]

use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use borrowbench::bench::Benchmark;
use borrowbench::gateway::HttpBackend;
use borrowbench::gateway::{Gateway, ModelSpec};
use borrowbench::parse::{parse, NormalizationTable};
use borrowbench::prompt::render;
use borrowbench::prompt::{Strategy, StrategyKind};
use borrowbench::Task;

const KEY_VAR: &str = "OPENROUTER_API_KEY";

fn main() -> borrowbench::Result<()> {
    if std::env::var_os(KEY_VAR).is_none() {
        eprintln!("{KEY_VAR} is not set; nothing to do.");
        return Ok(());
    }
    let mut args = std::env::args().skip(1);
    let mut spec = ModelSpec::new(args.next().unwrap_or_else(|| "google/gemma-3-12b-it".into()));
    spec.endpoint = args.next().unwrap_or_else(|| "https://openrouter.ai/api/v1".into());
    spec.auth = Some(KEY_VAR.into());

    let bench = Benchmark::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/bench.jsonl"))?;
    let instance = &bench.instances()[0];
    let prompt = render(instance, &Strategy::builtin(StrategyKind::ZeroShot), Task::Classify, None, &[])?;

    let backend = HttpBackend::new(Duration::from_secs(120))
        .map_err(|e| borrowbench::Error::InvalidArgument(e.to_string()))?;
    let result = Gateway::new(Arc::new(backend)).complete(&prompt, &spec);
    println!("status: {:?} after {} attempt(s) in {:?}", result.status, result.attempt_count, result.latency);
    if let Some(err) = &result.error {
        println!("error: {err}");
    }
    println!("raw: {:?}", result.raw_text);
    println!("parsed: {} (gold {})", parse(&result.raw_text, Task::Classify, &NormalizationTable::default()).as_str(), instance.gold);
    Ok(())
}
