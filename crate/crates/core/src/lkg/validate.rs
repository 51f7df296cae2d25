use std::collections::HashMap;
use std::fmt;

use super::model::{LkgGraph, NodeKind, Relation};
use crate::text::normalize_key;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ViolationRule {
    /// An edge endpoint is not in the node set.
    ReferentialIntegrity,
    /// Endpoint kinds do not fit the relation.
    EndpointKind,
    /// Contrastive edge between patterns with different affixes or the same donor.
    ContrastiveConstraint,
    /// Pattern without example pairs.
    PatternExamples,
    /// Loanword or pattern without exactly one donor.
    DonorCount,
    /// Node id prefix does not match its kind.
    IdKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub subject: String,
    pub rule: ViolationRule,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{:?}]: {}", self.subject, self.rule, self.message)
    }
}

fn allowed(relation: Relation, from: NodeKind, to: NodeKind) -> bool {
    use NodeKind::*;
    match relation {
        Relation::FollowsPattern => from == Loanword && to == Pattern,
        Relation::FromDonor => matches!(from, Loanword | Pattern) && to == Lang,
        Relation::HasSynonym => from == Loanword && to == NativeSyn,
        Relation::Contrastive => from == Pattern && to == Pattern,
        Relation::HasPos => from == Loanword && to == Pos,
    }
}

/// Every invariant violation in the graph; empty when well-formed.
pub fn validate(graph: &LkgGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut donor_edges: HashMap<&str, usize> = HashMap::new();

    for node in graph.nodes() {
        let prefix = format!("{}:", node.kind().id_prefix());
        if !node.id.starts_with(&prefix) {
            out.push(Violation {
                subject: node.id.clone(),
                rule: ViolationRule::IdKind,
                message: format!("{} node id lacks `{prefix}` prefix", node.kind()),
            });
        }
        if let Some(p) = node.pattern() {
            if p.examples.is_empty() {
                out.push(Violation {
                    subject: node.id.clone(),
                    rule: ViolationRule::PatternExamples,
                    message: "pattern has no example pairs".into(),
                });
            }
        }
    }

    for e in graph.edges() {
        let subject = format!("{} -{}-> {}", e.from, e.relation, e.to);
        let (from, to) = match (graph.node(&e.from), graph.node(&e.to)) {
            (Some(a), Some(b)) => (a, b),
            (a, _) => {
                let missing = if a.is_none() { &e.from } else { &e.to };
                out.push(Violation {
                    subject,
                    rule: ViolationRule::ReferentialIntegrity,
                    message: format!("endpoint `{missing}` does not exist"),
                });
                continue;
            }
        };
        if !allowed(e.relation, from.kind(), to.kind()) {
            out.push(Violation {
                subject,
                rule: ViolationRule::EndpointKind,
                message: format!("{} cannot link {} to {}", e.relation, from.kind(), to.kind()),
            });
            continue;
        }
        if e.relation == Relation::FromDonor {
            *donor_edges.entry(e.from.as_str()).or_default() += 1;
        }
        if e.relation == Relation::Contrastive {
            let (pa, pb) = (from.pattern().expect("kind checked"), to.pattern().expect("kind checked"));
            if normalize_key(&pa.affix_lux) != normalize_key(&pb.affix_lux) {
                out.push(Violation {
                    subject: subject.clone(),
                    rule: ViolationRule::ContrastiveConstraint,
                    message: format!("affixes differ: `{}` vs `{}`", pa.affix_lux, pb.affix_lux),
                });
            }
            let (da, db) = (graph.donor_of(&e.from), graph.donor_of(&e.to));
            if let Some(d) = da.filter(|_| da == db) {
                out.push(Violation {
                    subject,
                    rule: ViolationRule::ContrastiveConstraint,
                    message: format!("both patterns have donor {d}"),
                });
            }
        }
    }

    for node in graph.nodes() {
        if matches!(node.kind(), NodeKind::Loanword | NodeKind::Pattern) {
            let n = donor_edges.get(node.id.as_str()).copied().unwrap_or(0);
            if n != 1 {
                out.push(Violation {
                    subject: node.id.clone(),
                    rule: ViolationRule::DonorCount,
                    message: format!("expected exactly one from_donor edge, found {n}"),
                });
            }
        }
    }
    out
}
