//! Generate a synthetic token-labeled corpus as JSON lines.
//!
//!     cargo run --example synthetic_corpus -- [scale] [seed] > corpus.jsonl

use std::io::{self, BufWriter};

use borrowbench::synth::{generate, write_corpus, SynthSpec};

fn main() -> borrowbench::Result<()> {
    let mut args = std::env::args().skip(1);
    let scale = args.next().and_then(|s| s.parse().ok()).unwrap_or(60);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(42);
    let spec = SynthSpec::realistic(scale, seed);
    let tokens = generate(&spec);
    eprintln!("{} tokens; class counts before filtering:", tokens.len());
    for (label, n) in &spec.counts {
        eprintln!("  {label}: {n}");
    }
    write_corpus(&tokens, BufWriter::new(io::stdout().lock()))
}
