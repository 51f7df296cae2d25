//! Build a balanced benchmark from a synthetic corpus and print the
//! per-stratum breakdown.
//!
//!     cargo run --example build_benchmark -- [scale] [per_class]

use std::collections::BTreeMap;
use std::io::Cursor;

use borrowbench::bench::{build, BuildConfig};
use borrowbench::synth::{generate, write_corpus, SynthSpec};
use borrowbench::Era;

fn main() -> borrowbench::Result<()> {
    let mut args = std::env::args().skip(1);
    let scale: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(60);
    let per_class: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(40);

    let mut corpus = Vec::new();
    write_corpus(&generate(&SynthSpec::realistic(scale, 42)), &mut corpus)?;

    let config = BuildConfig {
        per_class,
        diagnostic_count: 10,
        seed: 7,
        ..BuildConfig::default()
    };
    let outcome = build(Cursor::new(corpus), &config, None)?;

    println!("pool after filtering:");
    for (label, n) in &outcome.pool_counts {
        let mark = if outcome.active.contains(label) { "" } else { "  (not sampled as a main class)" };
        println!("  {label:<12} {n:>6}{mark}");
    }

    let mut strata: BTreeMap<(String, Era), usize> = BTreeMap::new();
    for inst in &outcome.instances {
        *strata.entry((inst.gold.to_string(), inst.era)).or_default() += 1;
    }
    println!("\nsampled {} instances:", outcome.instances.len());
    for ((label, era), n) in strata {
        println!("  {label:<12} {era:<7} {n:>5}");
    }
    println!("\nrejected {} malformed line(s)", outcome.rejected.len());
    Ok(())
}
