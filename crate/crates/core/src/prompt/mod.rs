//! Two-role prompt rendering for every (instance, strategy, task) triple.

mod demos;
mod strategy;
pub mod template;

pub use demos::{builtin_demos, check_disjoint, Demo};
pub use strategy::{Strategy, StrategyKind, StrategyRegistry};

use serde::{Deserialize, Serialize};

use crate::bench::BenchmarkInstance;
use crate::error::{Error, Result};
use crate::label::Task;
use crate::lkg::{LkgGraph, NodeKind};
use crate::retrieval::{self, ablate, linearize, retrieve, RetrievalConfig};
use crate::text::{char_slice, mark_span, seed_from, sha256_hex};
use template::fill;

/// Default cap on global pattern entries.
pub const DEFAULT_PATTERN_CAP: usize = 20;

const SYSTEM: &str = include_str!("templates/system.txt");
const CLASSIFY: &str = include_str!("templates/classify.txt");
const NEOLOGY: &str = include_str!("templates/neology.txt");
const MINIMAL_CLASSIFY: &str = include_str!("templates/minimal_classify.txt");
const MINIMAL_NEOLOGY: &str = include_str!("templates/minimal_neology.txt");
const PATTERN_PREAMBLE: &str = include_str!("templates/pattern_preamble.txt");
const PATTERN_ENTRY: &str = include_str!("templates/pattern_entry.txt");
const DEMO: &str = include_str!("templates/demo.txt");
const SENTENCE: &str = include_str!("templates/sentence.txt");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub system: String,
    pub user: String,
    pub fingerprint: String,
}

impl RenderedPrompt {
    pub fn new(system: String, user: String) -> Self {
        let fingerprint = sha256_hex(&[&system, &user]);
        RenderedPrompt {
            system,
            user,
            fingerprint,
        }
    }
}

/// The fixed persona.
pub fn system_message() -> &'static str {
    SYSTEM.trim_end()
}

fn answer_labels(task: Task) -> &'static str {
    match task {
        Task::Classify => "NATIVE, FR_LOAN, DE_LOAN, EN_LOAN",
        Task::Neology => "YES, NO",
    }
}

/// The task instruction a strategy uses, before demos and sentence.
pub fn instruction(strategy: &Strategy, task: Task) -> Result<String> {
    if let Some(custom) = strategy.instructions.get(&task) {
        return fill(custom.trim_end(), &[("labels", answer_labels(task))]);
    }
    let text = match (strategy.kind, task) {
        (StrategyKind::Minimal, Task::Classify) => MINIMAL_CLASSIFY,
        (StrategyKind::Minimal, Task::Neology) => MINIMAL_NEOLOGY,
        (_, Task::Classify) => CLASSIFY,
        (_, Task::Neology) => NEOLOGY,
    };
    Ok(text.trim_end().to_string())
}

/// Preamble plus one line per pattern (by pattern_id, at most `cap`).
/// Identical for every instance.
pub fn global_pattern_block(graph: &LkgGraph, cap: usize) -> String {
    let mut patterns: Vec<_> = graph
        .nodes_of(NodeKind::Pattern)
        .filter_map(|n| n.pattern().map(|p| (n.id.as_str(), p)))
        .collect();
    patterns.sort_by(|a, b| a.1.pattern_id.cmp(&b.1.pattern_id));
    let mut lines = vec![PATTERN_PREAMBLE.trim_end().to_string()];
    for (id, p) in patterns.into_iter().take(cap) {
        let donor = graph.donor_of(id).map(|d| d.code()).unwrap_or("?");
        let examples = p
            .examples
            .iter()
            .take(3)
            .map(|e| format!("{} ← {}", e.lux, e.donor))
            .collect::<Vec<_>>()
            .join("; ");
        let entry = fill(
            PATTERN_ENTRY.trim_end(),
            &[
                ("name", &p.display_name()),
                ("type", p.pattern_type.short()),
                ("donor", donor),
                ("examples", &examples),
            ],
        )
        .expect("built-in pattern template");
        lines.push(retrieval::clean(&entry));
    }
    lines.join("\n")
}

fn demo_block(demos: &[Demo], task: Task) -> String {
    demos
        .iter()
        .map(|d| {
            let answer = match task {
                Task::Classify => d.label.as_str(),
                Task::Neology => d.label.neology().map(|n| n.as_str()).unwrap_or("YES"),
            };
            fill(
                DEMO.trim_end(),
                &[
                    ("sentence", &d.sentence),
                    ("token", &d.token),
                    ("answer", answer),
                    ("justification", &d.justification),
                ],
            )
            .expect("built-in demo template")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// The instance sentence with its token wrapped in `**`, located by offsets.
pub fn marked_sentence(instance: &BenchmarkInstance) -> Result<String> {
    let out_of_range = || Error::OffsetsOutOfRange {
        id: instance.id.clone(),
        start: instance.start,
        end: instance.end,
    };
    if instance.sentence.contains("**") {
        return Err(Error::InvalidArgument(format!(
            "instance {} already contains `**`",
            instance.id
        )));
    }
    match char_slice(&instance.sentence, instance.start, instance.end) {
        Some(span) if span == instance.token && !span.is_empty() => {}
        _ => return Err(out_of_range()),
    }
    mark_span(&instance.sentence, instance.start, instance.end).ok_or_else(out_of_range)
}

/// Build the exact (system, user) pair. Deterministic for fixed inputs.
pub fn render(
    instance: &BenchmarkInstance,
    strategy: &Strategy,
    task: Task,
    graph: Option<&LkgGraph>,
    demos: &[Demo],
) -> Result<RenderedPrompt> {
    strategy.validate()?;
    let graph = match graph {
        Some(g) => Some(g),
        None if strategy.needs_graph() => return Err(Error::MissingGraph(strategy.name.clone())),
        None => None,
    };
    if strategy.needs_demos() && demos.is_empty() {
        return Err(Error::MissingDemos(strategy.name.clone()));
    }
    let sentence = marked_sentence(instance)?;

    let mut sections = Vec::new();
    if let Some(g) = graph {
        if strategy.kind == StrategyKind::KgFlat {
            sections.push(global_pattern_block(g, DEFAULT_PATTERN_CAP));
        }
        if strategy.kind == StrategyKind::KgGraph || strategy.ablation.is_some() {
            let sub = retrieve(
                g,
                &instance.token,
                instance.lemma.as_deref(),
                seed_from(&instance.id),
                &RetrievalConfig::default(),
            );
            let sub = match strategy.ablation {
                Some(a) => ablate(&sub, a),
                None => sub,
            };
            sections.push(linearize(&sub, retrieval::DEFAULT_MAX_LINES));
        }
    }
    sections.push(instruction(strategy, task)?);
    if strategy.needs_demos() {
        sections.push(demo_block(demos, task));
    }
    sections.push(fill(SENTENCE.trim_end(), &[("sentence", &sentence)])?);

    Ok(RenderedPrompt::new(system_message().to_string(), sections.join("\n\n")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::instance_id;
    use crate::label::{Era, GoldLabel, NeologyLabel};
    use crate::lkg::ingest;
    use chrono::NaiveDate;

    const PATTERNS: &str = "pattern_id\taffix_lux\taffix_donor\tpattern_type\tdonor\texamples\n\
fr_eieren\téiere(n)\ter\tmorph\tFR\tabordéieren<aborder;reforméieren<réformer;organiséieren<organiser;informéieren<informer\n\
de_ung\tung\tung\tmorph\tDE\tAusstellung<Ausstellung\n";

    fn graph() -> LkgGraph {
        ingest(
            (PATTERNS.as_bytes(), "p.tsv"),
            (&b""[..], "l.jsonl"),
            (&b""[..], "s.tsv"),
        )
        .unwrap()
        .0
    }

    fn instance(sentence: &str, token: &str) -> BenchmarkInstance {
        let start = sentence.find(token).map(|b| sentence[..b].chars().count()).unwrap();
        let end = start + token.chars().count();
        let published = NaiveDate::from_ymd_opt(2020, 5, 1).unwrap();
        BenchmarkInstance {
            id: instance_id(sentence, start, end, published),
            sentence: sentence.into(),
            token: token.into(),
            start,
            end,
            gold: GoldLabel::FrLoan,
            era: Era::Recent,
            neology_gold: NeologyLabel::Yes,
            morph_evidence: vec![],
            section: "Politik".into(),
            published,
            lemma: None,
            lexicon_complete: false,
        }
    }

    fn marked_spans(user: &str) -> Vec<&str> {
        user.split("**").skip(1).step_by(2).collect()
    }

    #[test]
    fn zero_shot_classify_lists_labels_and_ends_with_sentence() {
        let inst = instance("Si wëllen d'Sëtzung abordéieren.", "abordéieren");
        let p = render(&inst, &Strategy::builtin(StrategyKind::ZeroShot), Task::Classify, None, &[]).unwrap();
        assert!(p.system.starts_with("You are a linguistic expert specializing in Luxembourgish"));
        assert!(p.user.contains("decide whether the highlighted word is"));
        for l in GoldLabel::ANSWER_SPACE {
            assert_eq!(p.user.matches(l.as_str()).count(), 1, "{l}");
        }
        assert!(p.user.ends_with("Sentence: Si wëllen d'Sëtzung **abordéieren**."));
        assert_eq!(marked_spans(&p.user), vec!["abordéieren"]);
    }

    #[test]
    fn kg_flat_begins_with_preamble() {
        let g = graph();
        let inst = instance("Si wëllen d'Sëtzung abordéieren.", "abordéieren");
        let p = render(&inst, &Strategy::builtin(StrategyKind::KgFlat), Task::Classify, Some(&g), &[]).unwrap();
        assert!(p.user.starts_with("According to the LOD, "));
        assert_eq!(marked_spans(&p.user), vec!["abordéieren"]);
    }

    #[test]
    fn minimal_neology_is_one_line_plus_sentence() {
        let inst = instance("Dat ass e Bléckfang.", "Bléckfang");
        let p = render(&inst, &Strategy::builtin(StrategyKind::Minimal), Task::Neology, None, &[]).unwrap();
        let lines: Vec<&str> = p.user.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].contains("YES or NO"));
        assert_eq!(lines[1], "");
        assert_eq!(lines[2], "Sentence: Dat ass e **Bléckfang**.");
    }

    #[test]
    fn pattern_block_format_and_cap() {
        let g = graph();
        let block = global_pattern_block(&g, 20);
        let lines: Vec<&str> = block.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[1], "ung → ung, type. morph, donor. DE, e.g. Ausstellung ← Ausstellung");
        assert!(lines[2].starts_with("éiere → er, type. morph, donor. FR, e.g. abordéieren ← aborder"));
        // at most three example pairs
        assert_eq!(lines[2].matches('←').count(), 3);
        assert_eq!(global_pattern_block(&g, 1).lines().count(), 2);
        let empty = LkgGraph::new(vec![], vec![]).unwrap();
        assert_eq!(global_pattern_block(&empty, 20), PATTERN_PREAMBLE.trim_end());
    }

    #[test]
    fn missing_resources_are_errors() {
        let inst = instance("Si wëllen d'Sëtzung abordéieren.", "abordéieren");
        assert!(matches!(
            render(&inst, &Strategy::builtin(StrategyKind::KgGraph), Task::Classify, None, &[]),
            Err(Error::MissingGraph(_))
        ));
        assert!(matches!(
            render(&inst, &Strategy::builtin(StrategyKind::FewShot), Task::Classify, None, &[]),
            Err(Error::MissingDemos(_))
        ));
        let mut bad = inst.clone();
        bad.end = 500;
        assert!(matches!(
            render(&bad, &Strategy::builtin(StrategyKind::ZeroShot), Task::Classify, None, &[]),
            Err(Error::OffsetsOutOfRange { .. })
        ));
    }

    #[test]
    fn offsets_not_first_occurrence() {
        let mut inst = instance("Haus an Haus.", "Haus");
        inst.start = 8;
        inst.end = 12;
        let p = render(&inst, &Strategy::builtin(StrategyKind::ZeroShot), Task::Neology, None, &[]).unwrap();
        assert!(p.user.ends_with("Sentence: Haus an **Haus**."));
    }

    #[test]
    fn few_shot_keeps_a_single_marked_span() {
        let inst = instance("Si wëllen d'Sëtzung abordéieren.", "abordéieren");
        for task in Task::ALL {
            let p = render(&inst, &Strategy::builtin(StrategyKind::FewShot), task, None, &builtin_demos()).unwrap();
            assert_eq!(marked_spans(&p.user), vec!["abordéieren"]);
            assert!(p.user.contains("Pompjeeën"));
        }
    }

    #[test]
    fn custom_instruction_template() {
        let s = Strategy::new("terse", StrategyKind::ZeroShot, None)
            .unwrap()
            .with_instruction(Task::Classify, "Pick one of {{labels}}.");
        let inst = instance("Dat ass e Bléckfang.", "Bléckfang");
        let p = render(&inst, &s, Task::Classify, None, &[]).unwrap();
        assert!(p.user.starts_with("Pick one of NATIVE, FR_LOAN, DE_LOAN, EN_LOAN.\n\n"));
    }

    #[test]
    fn fingerprint_is_stable_and_content_sensitive() {
        let inst = instance("Dat ass e Bléckfang.", "Bléckfang");
        let s = Strategy::builtin(StrategyKind::ZeroShot);
        let a = render(&inst, &s, Task::Classify, None, &[]).unwrap();
        let b = render(&inst, &s, Task::Classify, None, &[]).unwrap();
        let c = render(&inst, &s, Task::Neology, None, &[]).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.fingerprint, c.fingerprint);
        assert_eq!(a.fingerprint.len(), 64);
    }
}
