//! Linguistic knowledge graph: typed nodes for adaptation patterns, donor
//! languages, loanwords, native synonyms and POS tags.

mod ingest;
mod model;
mod validate;

pub use ingest::{ingest, ingest_files, parse_patterns, IngestReport};
pub use model::{
    node_id, Affix, ExamplePair, LkgEdge, LkgGraph, LkgNode, LoanwordPayload, NodeKind, NodePayload,
    PatternPayload, PatternType, Relation,
};
pub use validate::{validate, Violation, ViolationRule};
