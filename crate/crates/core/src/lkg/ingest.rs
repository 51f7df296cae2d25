use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use log::warn;

use super::model::{
    node_id, Affix, ExamplePair, LkgEdge, LkgGraph, LkgNode, LoanwordPayload, NodeKind, NodePayload,
    PatternPayload, PatternType, Relation,
};
use crate::error::{Error, Result};
use crate::label::Donor;
use crate::lexicon::LexiconEntry;
use crate::text::normalize_key;

#[derive(Debug, Clone, Default)]
pub struct IngestReport {
    /// Non-fatal problems, e.g. a loanword naming a pattern missing from the
    /// index.
    pub warnings: Vec<String>,
}

fn data_lines<R: BufRead>(reader: R, name: &str) -> Result<Vec<(usize, String)>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(name, e))?;
        let trimmed = line.trim_end_matches(['\r', '\n']);
        if trimmed.trim().is_empty() || trimmed.trim_start().starts_with('#') {
            continue;
        }
        out.push((i + 1, trimmed.to_string()));
    }
    Ok(out)
}

/// Parse the tab-separated pattern index:
/// `pattern_id, affix_lux, affix_donor, type, donor, examples`.
pub fn parse_patterns<R: BufRead>(reader: R, name: &str) -> Result<Vec<(PatternPayload, Donor)>> {
    let mut out = Vec::new();
    for (line_no, line) in data_lines(reader, name)? {
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cols.first() == Some(&"pattern_id") {
            continue;
        }
        if cols.len() != 6 {
            return Err(Error::schema(
                name,
                line_no,
                format!("expected 6 tab-separated columns, found {}", cols.len()),
            ));
        }
        let field_err = |field: &str, msg: String| Error::schema(name, line_no, format!("field `{field}`: {msg}"));
        if cols[0].is_empty() {
            return Err(field_err("pattern_id", "empty".into()));
        }
        if Affix::parse(cols[1]).is_none() {
            return Err(field_err("affix_lux", format!("malformed affix `{}`", cols[1])));
        }
        let pattern_type: PatternType = cols[3].parse().map_err(|e: Error| field_err("type", e.to_string()))?;
        let donor: Donor = cols[4].parse().map_err(|e: Error| field_err("donor", e.to_string()))?;
        let mut examples = Vec::new();
        for pair in cols[5].split(';').map(str::trim).filter(|p| !p.is_empty()) {
            match pair.split_once('<') {
                Some((lux, don)) if !lux.trim().is_empty() && !don.trim().is_empty() => {
                    examples.push(ExamplePair {
                        lux: lux.trim().to_string(),
                        donor: don.trim().to_string(),
                    })
                }
                _ => return Err(field_err("examples", format!("malformed pair `{pair}`"))),
            }
        }
        if examples.is_empty() {
            return Err(field_err("examples", "at least one `lux<donor` pair required".into()));
        }
        out.push((
            PatternPayload {
                pattern_id: cols[0].to_string(),
                affix_lux: cols[1].to_string(),
                affix_donor: cols[2].to_string(),
                pattern_type,
                examples,
            },
            donor,
        ));
    }
    Ok(out)
}

fn parse_lexicon<R: BufRead>(reader: R, name: &str) -> Result<Vec<(usize, LexiconEntry)>> {
    let mut out = Vec::new();
    for (line_no, line) in data_lines(reader, name)? {
        let entry: LexiconEntry =
            serde_json::from_str(&line).map_err(|e| Error::schema(name, line_no, e.to_string()))?;
        if entry.lemma.trim().is_empty() {
            return Err(Error::schema(name, line_no, "field `lemma`: empty"));
        }
        out.push((line_no, entry));
    }
    Ok(out)
}

fn parse_synonyms<R: BufRead>(reader: R, name: &str) -> Result<Vec<(usize, String, String)>> {
    let mut out = Vec::new();
    for (line_no, line) in data_lines(reader, name)? {
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cols.first() == Some(&"loanword_lemma") {
            continue;
        }
        if cols.len() != 2 || cols[0].is_empty() || cols[1].is_empty() {
            return Err(Error::schema(
                name,
                line_no,
                "expected `loanword_lemma<TAB>native_synonym`",
            ));
        }
        out.push((line_no, cols[0].to_string(), cols[1].to_string()));
    }
    Ok(out)
}

struct Builder {
    nodes: BTreeMap<String, LkgNode>,
    edges: BTreeSet<LkgEdge>,
}

impl Builder {
    fn add_unique(&mut self, node: LkgNode) -> Result<()> {
        if self.nodes.contains_key(&node.id) {
            return Err(Error::DuplicateNode(node.id));
        }
        self.nodes.insert(node.id.clone(), node);
        Ok(())
    }

    fn ensure(&mut self, id: String, payload: impl FnOnce() -> NodePayload) -> String {
        self.nodes
            .entry(id.clone())
            .or_insert_with(|| LkgNode {
                id: id.clone(),
                payload: payload(),
            });
        id
    }

    fn lang(&mut self, donor: Donor) -> String {
        self.ensure(node_id(NodeKind::Lang, donor.code()), || NodePayload::Lang { donor })
    }
}

/// Build the graph from the three resources.
pub fn ingest<P: BufRead, L: BufRead, S: BufRead>(
    patterns: (P, &str),
    lexicon: (L, &str),
    synonyms: (S, &str),
) -> Result<(LkgGraph, IngestReport)> {
    let mut report = IngestReport::default();
    let mut b = Builder {
        nodes: BTreeMap::new(),
        edges: BTreeSet::new(),
    };

    let patterns = parse_patterns(patterns.0, patterns.1)?;
    let mut pattern_donor = Vec::new();
    for (payload, donor) in patterns {
        let id = node_id(NodeKind::Pattern, &payload.pattern_id);
        let key = normalize_key(&payload.affix_lux);
        b.add_unique(LkgNode {
            id: id.clone(),
            payload: NodePayload::Pattern(payload),
        })?;
        let lang = b.lang(donor);
        b.edges.insert(LkgEdge::new(&id, lang, Relation::FromDonor));
        pattern_donor.push((id, key, donor));
    }

    // Same Luxembourgish affix, different donor: one edge per pair.
    for (i, (a, ka, da)) in pattern_donor.iter().enumerate() {
        for (c, kc, dc) in &pattern_donor[i + 1..] {
            if ka == kc && da != dc {
                let (lo, hi) = if a < c { (a, c) } else { (c, a) };
                b.edges.insert(LkgEdge::new(lo, hi, Relation::Contrastive));
            }
        }
    }

    let (lex_reader, lex_name) = lexicon;
    for (line_no, entry) in parse_lexicon(lex_reader, lex_name)? {
        let id = node_id(NodeKind::Loanword, &entry.lemma);
        b.add_unique(LkgNode {
            id: id.clone(),
            payload: NodePayload::Loanword(LoanwordPayload {
                lemma: entry.lemma.clone(),
                donor_form: entry.donor_form.clone(),
                definition: entry.definition.clone(),
                etymology: entry.etymology.clone(),
            }),
        })?;
        let lang = b.lang(entry.donor);
        b.edges.insert(LkgEdge::new(&id, lang, Relation::FromDonor));
        if !entry.pos.trim().is_empty() {
            let tag = entry.pos.trim().to_string();
            let pos = b.ensure(node_id(NodeKind::Pos, &tag), || NodePayload::Pos { tag });
            b.edges.insert(LkgEdge::new(&id, pos, Relation::HasPos));
        }
        for p in &entry.patterns {
            let pid = node_id(NodeKind::Pattern, p);
            if b.nodes.contains_key(&pid) {
                b.edges.insert(LkgEdge::new(&id, pid, Relation::FollowsPattern));
            } else {
                let msg = format!(
                    "{lex_name}:{line_no}: loanword `{}` references unknown pattern `{p}`",
                    entry.lemma
                );
                warn!("{msg}");
                report.warnings.push(msg);
            }
        }
    }

    let (syn_reader, syn_name) = synonyms;
    for (line_no, loan, native) in parse_synonyms(syn_reader, syn_name)? {
        let lid = node_id(NodeKind::Loanword, &loan);
        if !b.nodes.contains_key(&lid) {
            return Err(Error::DanglingReference {
                file: syn_name.to_string(),
                line: line_no,
                message: format!("loanword `{loan}` not in lexicon"),
            });
        }
        let sid = b.ensure(node_id(NodeKind::NativeSyn, &native), || NodePayload::NativeSyn {
            lemma: native.clone(),
        });
        b.edges.insert(LkgEdge::new(lid, sid, Relation::HasSynonym));
    }

    let graph = LkgGraph::new(b.nodes.into_values().collect(), b.edges.into_iter().collect())?;
    Ok((graph, report))
}

pub fn ingest_files(patterns: &Path, lexicon: &Path, synonyms: &Path) -> Result<(LkgGraph, IngestReport)> {
    let open = |p: &Path| File::open(p).map(BufReader::new).map_err(|e| Error::io(p, e));
    let (pn, ln, sn) = (
        patterns.display().to_string(),
        lexicon.display().to_string(),
        synonyms.display().to_string(),
    );
    ingest(
        (open(patterns)?, pn.as_str()),
        (open(lexicon)?, ln.as_str()),
        (open(synonyms)?, sn.as_str()),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lkg::validate;

    const PATTERNS: &str = "pattern_id\taffix_lux\taffix_donor\ttype\tdonor\texamples
fr_eieren\téiere(n)\ter\tmorphological\tFR\tabordéieren<aborder;reforméieren<réformer
de_eieren\téiere(n)\tieren\tmorphological\tDE\tstudéieren<studieren
";

    const LEXICON: &str = r#"{"lemma":"abordéieren","donor":"FR","donor_form":"aborder","pos":"verb","definition":"to address","etymology":"from French aborder","patterns":["fr_eieren"]}
{"lemma":"reforméieren","donor":"FR","donor_form":"réformer","pos":"verb","definition":"to reform","etymology":"from French réformer","patterns":["fr_eieren"]}
{"lemma":"studéieren","donor":"DE","donor_form":"studieren","pos":"verb","definition":"to study","etymology":"from German studieren","patterns":["de_eieren","missing"]}
"#;

    fn run(p: &str, l: &str, s: &str) -> Result<(LkgGraph, IngestReport)> {
        ingest((p.as_bytes(), "p.tsv"), (l.as_bytes(), "l.jsonl"), (s.as_bytes(), "s.tsv"))
    }

    #[test]
    fn hand_enumerated_counts() {
        let (g, report) = run(PATTERNS, LEXICON, "abordéieren\tuschwätzen\n").unwrap();
        // nodes: 2 patterns + 2 langs + 3 loanwords + 1 POS + 1 native syn
        assert_eq!(g.node_count(), 9);
        // edges: 2 pattern from_donor, 3 loanword from_donor, 3 has_pos,
        // 3 follows_pattern, 1 contrastive, 1 has_synonym
        assert_eq!(g.edge_count(), 13);
        assert_eq!(report.warnings.len(), 1);
        assert!(report.warnings[0].contains("missing"));
        assert!(validate(&g).is_empty(), "{:?}", validate(&g));
    }

    #[test]
    fn same_affix_different_donor_gives_one_contrastive_edge() {
        let (g, _) = run(PATTERNS, "", "").unwrap();
        let c: Vec<_> = g.edges().iter().filter(|e| e.relation == Relation::Contrastive).collect();
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].from, "pattern:de_eieren");
        assert_eq!(c[0].to, "pattern:fr_eieren");
    }

    #[test]
    fn empty_synonym_table_gives_no_synonym_edges() {
        let (g, _) = run(PATTERNS, LEXICON, "").unwrap();
        assert!(g.edges().iter().all(|e| e.relation != Relation::HasSynonym));
    }

    #[test]
    fn errors_name_file_line_and_field() {
        let bad = "p1\tage\tage\tlexical\tIT\tGarage<garage\n";
        let err = run(bad, "", "").unwrap_err().to_string();
        assert!(err.starts_with("p.tsv:1:"), "{err}");
        assert!(err.contains("`donor`"), "{err}");

        let no_examples = "p1\tage\tage\tlexical\tFR\t\n";
        assert!(run(no_examples, "", "").unwrap_err().to_string().contains("`examples`"));

        let dangling = run(PATTERNS, LEXICON, "Garage\tGaragen\n").unwrap_err();
        assert!(matches!(dangling, Error::DanglingReference { line: 1, .. }));

        let dup = format!("{LEXICON}{{\"lemma\":\"Abordéieren\",\"donor\":\"FR\",\"donor_form\":\"x\"}}\n");
        assert!(matches!(run(PATTERNS, &dup, ""), Err(Error::DuplicateNode(id)) if id == "loanword:abordéieren"));
    }

    #[test]
    fn idempotent_and_byte_stable() {
        let (a, _) = run(PATTERNS, LEXICON, "abordéieren\tuschwätzen\n").unwrap();
        let (b, _) = run(PATTERNS, LEXICON, "abordéieren\tuschwätzen\n").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let back = LkgGraph::from_json(&a.to_json().unwrap()).unwrap();
        assert_eq!(back, a);
    }
}
