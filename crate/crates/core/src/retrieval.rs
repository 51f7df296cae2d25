//! Token-specific explanation subgraphs and their plain-text rendering.
//!
//! Retrieval walks the graph outward from the target token: lexicon
//! attestation, the best compatible adaptation pattern, native synonyms,
//! pattern-sharing analogues and contrastive patterns.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::label::Donor;
use crate::lkg::{node_id, LkgGraph, NodeKind, NodePayload, Relation};
use crate::text::normalize_key;

pub const DEFAULT_ANALOGUES: usize = 3;
pub const DEFAULT_CONTRASTIVE: usize = 2;
pub const DEFAULT_MAX_LINES: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternMatch {
    pub pattern: String,
    pub donor: Donor,
    pub matched_suffix: String,
    pub reconstructed_donor_form: String,
}

/// Every pattern whose Luxembourgish affix ends the case-folded token,
/// longest matched suffix first, ties by pattern id.
pub fn match_patterns(token: &str, graph: &LkgGraph) -> Vec<PatternMatch> {
    let surface: String = token.trim().nfc().collect();
    let folded = normalize_key(&surface);
    // Keep original casing for the stem when folding preserves length.
    let stem_source: Vec<char> = if folded.chars().count() == surface.chars().count() {
        surface.chars().collect()
    } else {
        folded.chars().collect()
    };

    let mut out: Vec<PatternMatch> = graph
        .nodes_of(NodeKind::Pattern)
        .filter_map(|node| {
            let p = node.pattern()?;
            let donor = graph.donor_of(&node.id)?;
            let suffix = p
                .affix()
                .variants()
                .into_iter()
                .map(|v| normalize_key(&v))
                .find(|v| !v.is_empty() && folded.ends_with(v.as_str()))?;
            let keep = stem_source.len().saturating_sub(suffix.chars().count());
            let stem: String = stem_source[..keep].iter().collect();
            Some(PatternMatch {
                pattern: node.id.clone(),
                donor,
                reconstructed_donor_form: format!("{stem}{}", p.affix_donor),
                matched_suffix: suffix,
            })
        })
        .collect();
    out.sort_by(|a, b| {
        b.matched_suffix
            .chars()
            .count()
            .cmp(&a.matched_suffix.chars().count())
            .then_with(|| a.pattern.cmp(&b.pattern))
    });
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attestation {
    pub node: String,
    pub lemma: String,
    pub donor: Option<Donor>,
    pub donor_form: String,
    pub definition: String,
    pub etymology: String,
    pub pos: Option<String>,
}

/// `donor form -> pattern -> Luxembourgish form`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EtymologyChain {
    pub donor_form: String,
    pub pattern: String,
    pub pattern_label: String,
    pub luxembourgish_form: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Synonym {
    pub node: String,
    pub lemma: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Analogue {
    pub node: String,
    pub luxembourgish_form: String,
    pub donor_form: String,
    pub pattern: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContrastivePattern {
    pub pattern: String,
    pub pattern_label: String,
    pub donor: Donor,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ExplanationSubgraph {
    pub target: String,
    pub attestation: Option<Attestation>,
    pub etymology_chain: Option<EtymologyChain>,
    pub synonyms: Vec<Synonym>,
    pub analogues: Vec<Analogue>,
    pub contrastive: Vec<ContrastivePattern>,
}

impl ExplanationSubgraph {
    pub fn empty(target: impl Into<String>) -> Self {
        ExplanationSubgraph {
            target: target.into(),
            ..Default::default()
        }
    }

    pub fn has_evidence(&self) -> bool {
        self.attestation.is_some()
            || self.etymology_chain.is_some()
            || !self.synonyms.is_empty()
            || !self.analogues.is_empty()
            || !self.contrastive.is_empty()
    }

    /// Every graph node id this subgraph mentions.
    pub fn referenced_nodes(&self) -> Vec<&str> {
        let mut v = Vec::new();
        if let Some(a) = &self.attestation {
            v.push(a.node.as_str());
        }
        if let Some(c) = &self.etymology_chain {
            v.push(c.pattern.as_str());
        }
        v.extend(self.synonyms.iter().map(|s| s.node.as_str()));
        for a in &self.analogues {
            v.push(a.node.as_str());
            v.push(a.pattern.as_str());
        }
        v.extend(self.contrastive.iter().map(|c| c.pattern.as_str()));
        v
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetrievalConfig {
    /// Maximum analogues (K).
    pub analogues: usize,
    /// Maximum contrastive patterns (M).
    pub contrastive: usize,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        RetrievalConfig {
            analogues: DEFAULT_ANALOGUES,
            contrastive: DEFAULT_CONTRASTIVE,
        }
    }
}

fn pattern_label(graph: &LkgGraph, id: &str) -> String {
    graph
        .node(id)
        .and_then(|n| n.pattern())
        .map(|p| format!("{}: {}", p.pattern_id, p.display_name()))
        .unwrap_or_else(|| id.to_string())
}

fn lookup_loanword<'g>(graph: &'g LkgGraph, token: &str, lemma: Option<&str>) -> Option<&'g str> {
    let by_surface = node_id(NodeKind::Loanword, token);
    if let Some(n) = graph.node(&by_surface) {
        return Some(n.id.as_str());
    }
    let by_lemma = node_id(NodeKind::Loanword, lemma?);
    graph.node(&by_lemma).map(|n| n.id.as_str())
}

/// Multi-hop retrieval for one token. Deterministic for fixed inputs.
pub fn retrieve(
    graph: &LkgGraph,
    token: &str,
    lemma: Option<&str>,
    seed: u64,
    config: &RetrievalConfig,
) -> ExplanationSubgraph {
    let mut sub = ExplanationSubgraph::empty(token);
    let matches = match_patterns(token, graph);

    let attested = lookup_loanword(graph, token, lemma);
    if let Some(id) = attested {
        let payload = graph.node(id).and_then(|n| n.loanword()).expect("loanword node");
        sub.attestation = Some(Attestation {
            node: id.to_string(),
            lemma: payload.lemma.clone(),
            donor: graph.donor_of(id),
            donor_form: payload.donor_form.clone(),
            definition: payload.definition.clone(),
            etymology: payload.etymology.clone(),
            pos: graph.pos_of(id).map(str::to_string),
        });
        sub.synonyms = graph
            .targets(id, Relation::HasSynonym)
            .filter_map(|s| match &graph.node(s)?.payload {
                NodePayload::NativeSyn { lemma } => Some(Synonym {
                    node: s.to_string(),
                    lemma: lemma.clone(),
                }),
                _ => None,
            })
            .collect();
    }

    // Pick the pattern for the chain; an attested donor constrains it.
    let chosen: Option<(String, String)> = match &sub.attestation {
        Some(att) => att.donor.and_then(|donor| {
            let declared: Vec<&str> = graph.targets(&att.node, Relation::FollowsPattern).collect();
            let same_donor = || matches.iter().filter(|m| m.donor == donor);
            same_donor()
                .find(|m| declared.contains(&m.pattern.as_str()))
                .or_else(|| same_donor().next())
                .map(|m| m.pattern.clone())
                .or_else(|| {
                    declared
                        .iter()
                        .find(|p| graph.donor_of(p) == Some(donor))
                        .map(|p| p.to_string())
                })
                .map(|p| (p, att.donor_form.clone()))
        }),
        None => matches
            .first()
            .map(|m| (m.pattern.clone(), m.reconstructed_donor_form.clone())),
    };

    if let Some((pattern, donor_form)) = chosen {
        sub.etymology_chain = Some(EtymologyChain {
            donor_form,
            pattern_label: pattern_label(graph, &pattern),
            pattern: pattern.clone(),
            luxembourgish_form: token.to_string(),
        });

        let mates: Vec<&str> = graph
            .sources(&pattern, Relation::FollowsPattern)
            .into_iter()
            .filter(|id| Some(*id) != attested)
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let take = config.analogues.min(mates.len());
        let mut picked = rand::seq::index::sample(&mut rng, mates.len(), take).into_vec();
        picked.sort_unstable();
        sub.analogues = picked
            .into_iter()
            .filter_map(|i| {
                let id = mates[i];
                let lw = graph.node(id)?.loanword()?;
                Some(Analogue {
                    node: id.to_string(),
                    luxembourgish_form: lw.lemma.clone(),
                    donor_form: lw.donor_form.clone(),
                    pattern: pattern.clone(),
                })
            })
            .collect();

        sub.contrastive = graph
            .contrastive_of(&pattern)
            .into_iter()
            .filter_map(|p| {
                Some(ContrastivePattern {
                    pattern: p.to_string(),
                    pattern_label: pattern_label(graph, p),
                    donor: graph.donor_of(p)?,
                })
            })
            .take(config.contrastive)
            .collect();
    }
    sub
}

pub(crate) fn clean(s: &str) -> String {
    let one_line = s.split_whitespace().collect::<Vec<_>>().join(" ");
    let mut out = one_line;
    while out.contains("**") {
        out = out.replace("**", "*");
    }
    out
}

/// Render the subgraph as labeled lines, at most `max_lines` long. Sections
/// come in a fixed order (attestation, etymology, synonyms, analogues,
/// contrastive) and truncation drops whole lines from the end.
pub fn linearize(sub: &ExplanationSubgraph, max_lines: usize) -> String {
    let max_lines = max_lines.max(1);
    if !sub.has_evidence() {
        return format!("No lexicon evidence found for \"{}\".", clean(&sub.target));
    }
    let mut lines = Vec::new();
    if let Some(a) = &sub.attestation {
        let origin = match a.donor {
            Some(d) => format!("a borrowing from {}", d.language_name()),
            None => "a loanword".to_string(),
        };
        let pos = a.pos.as_deref().map(|p| format!(", POS {}", clean(p))).unwrap_or_default();
        lines.push(format!(
            "lexicon: \"{}\" is listed as {origin} (donor form \"{}\"{pos}).",
            clean(&a.lemma),
            clean(&a.donor_form)
        ));
        if !a.definition.trim().is_empty() {
            lines.push(format!("definition: {}", clean(&a.definition)));
        }
        if !a.etymology.trim().is_empty() {
            lines.push(format!("dictionary etymology: {}", clean(&a.etymology)));
        }
    }
    if let Some(c) = &sub.etymology_chain {
        lines.push(format!(
            "etymology: {} -> [{}] -> {}",
            clean(&c.donor_form),
            clean(&c.pattern_label),
            clean(&c.luxembourgish_form)
        ));
    }
    if !sub.synonyms.is_empty() {
        let names: Vec<String> = sub.synonyms.iter().map(|s| clean(&s.lemma)).collect();
        lines.push(format!("native synonyms: {}", names.join(", ")));
    }
    for a in &sub.analogues {
        lines.push(format!(
            "analogue: {} <- {} (same pattern)",
            clean(&a.luxembourgish_form),
            clean(&a.donor_form)
        ));
    }
    for c in &sub.contrastive {
        lines.push(format!(
            "contrastive pattern: [{}] has the same affix but comes from {}",
            clean(&c.pattern_label),
            c.donor.language_name()
        ));
    }
    lines.truncate(max_lines);
    lines.join("\n")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ablation {
    NoAttestation,
    NoEtymology,
    NoSynonyms,
    NoAnalogues,
    NoContrastive,
    LexOnly,
}

impl Ablation {
    pub const ALL: [Ablation; 6] = [
        Ablation::NoAttestation,
        Ablation::NoEtymology,
        Ablation::NoSynonyms,
        Ablation::NoAnalogues,
        Ablation::NoContrastive,
        Ablation::LexOnly,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Ablation::NoAttestation => "no_attestation",
            Ablation::NoEtymology => "no_etymology",
            Ablation::NoSynonyms => "no_synonyms",
            Ablation::NoAnalogues => "no_analogues",
            Ablation::NoContrastive => "no_contrastive",
            Ablation::LexOnly => "lex_only",
        }
    }
}

impl fmt::Display for Ablation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Ablation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ablation::ALL
            .into_iter()
            .find(|a| a.as_str() == s)
            .ok_or_else(|| Error::UnknownValue {
                what: "ablation variant",
                value: s.to_string(),
            })
    }
}

/// Copy of `sub` with one component emptied. `LexOnly` keeps only the
/// attestation.
pub fn ablate(sub: &ExplanationSubgraph, variant: Ablation) -> ExplanationSubgraph {
    let mut out = sub.clone();
    match variant {
        Ablation::NoAttestation => out.attestation = None,
        Ablation::NoEtymology => out.etymology_chain = None,
        Ablation::NoSynonyms => out.synonyms.clear(),
        Ablation::NoAnalogues => out.analogues.clear(),
        Ablation::NoContrastive => out.contrastive.clear(),
        Ablation::LexOnly => {
            out.etymology_chain = None;
            out.synonyms.clear();
            out.analogues.clear();
            out.contrastive.clear();
        }
    }
    out
}
