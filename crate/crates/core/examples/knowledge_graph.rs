//! Ingest the bundled pattern index, lexicon and synonym table, validate the
//! graph and list what it contains.
//!
//!     cargo run --example knowledge_graph

use std::path::Path;

use borrowbench::lkg::ingest_files;
use borrowbench::lkg::{NodeKind, Relation};
use borrowbench::lkg::validate;

fn main() -> borrowbench::Result<()> {
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("data");
    let (graph, report) = ingest_files(
        &data.join("patterns.tsv"),
        &data.join("lexicon.jsonl"),
        &data.join("synonyms.tsv"),
    )?;
    for w in &report.warnings {
        println!("warning: {w}");
    }
    println!("{} nodes, {} edges", graph.node_count(), graph.edge_count());

    println!("\npatterns:");
    for node in graph.nodes_of(NodeKind::Pattern) {
        let p = node.pattern().expect("pattern payload");
        let contrast = graph.contrastive_of(&node.id).len();
        println!("  {:<12} {:<22} {contrast} contrastive", p.pattern_id, p.display_name());
    }

    println!("\nattested loanwords:");
    for node in graph.nodes_of(NodeKind::Loanword) {
        let lw = node.loanword().expect("loanword payload");
        let patterns: Vec<_> = graph.targets(&node.id, Relation::FollowsPattern).collect();
        let synonyms: Vec<_> = graph.targets(&node.id, Relation::HasSynonym).collect();
        println!(
            "  {:<16} <- {:<14} [{}] synonyms: {}",
            lw.lemma,
            lw.donor_form,
            patterns.join(", "),
            synonyms.join(", ")
        );
    }

    let violations = validate(&graph);
    println!("\n{} schema violation(s)", violations.len());
    for v in violations {
        println!("  {v}");
    }
    Ok(())
}
