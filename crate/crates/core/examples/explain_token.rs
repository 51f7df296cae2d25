//! Retrieve and linearize the explanation subgraph for a token, then show
//! every ablation of it.
//!
//!     cargo run --example explain_token -- [token] [lemma]

use std::path::Path;

use borrowbench::lkg::LkgGraph;
use borrowbench::retrieval::{ablate, linearize, retrieve, Ablation, RetrievalConfig, DEFAULT_MAX_LINES};

fn main() -> borrowbench::Result<()> {
    let mut args = std::env::args().skip(1);
    let token = args.next().unwrap_or_else(|| "abordéieren".into());
    let lemma = args.next();
    let graph = LkgGraph::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("data/lkg.json"))?;

    let sub = retrieve(&graph, &token, lemma.as_deref(), 0, &RetrievalConfig::default());
    println!("== full context ==\n{}", linearize(&sub, DEFAULT_MAX_LINES));
    println!("\nreferenced nodes: {}", sub.referenced_nodes().join(", "));

    for variant in Ablation::ALL {
        println!("\n== {} ==\n{}", variant.as_str(), linearize(&ablate(&sub, variant), DEFAULT_MAX_LINES));
    }
    Ok(())
}
