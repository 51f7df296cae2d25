//! Normalization of free-text model output to one canonical label.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::label::{Answer, GoldLabel, NeologyLabel, Task};

const CLASSIFY_ALIASES: &[(&str, GoldLabel)] = &[
    ("native", GoldLabel::Native),
    ("fr_loan", GoldLabel::FrLoan),
    ("de_loan", GoldLabel::DeLoan),
    ("en_loan", GoldLabel::EnLoan),
    ("luxembourgish", GoldLabel::Native),
    ("lb", GoldLabel::Native),
    ("ltz", GoldLabel::Native),
    ("lux", GoldLabel::Native),
    ("native_luxembourgish", GoldLabel::Native),
    ("native_word", GoldLabel::Native),
    ("french", GoldLabel::FrLoan),
    ("fr", GoldLabel::FrLoan),
    ("fr_loanword", GoldLabel::FrLoan),
    ("french_loan", GoldLabel::FrLoan),
    ("french_loanword", GoldLabel::FrLoan),
    ("german", GoldLabel::DeLoan),
    ("de", GoldLabel::DeLoan),
    ("de_loanword", GoldLabel::DeLoan),
    ("german_loan", GoldLabel::DeLoan),
    ("german_loanword", GoldLabel::DeLoan),
    ("english", GoldLabel::EnLoan),
    ("en", GoldLabel::EnLoan),
    ("en_loanword", GoldLabel::EnLoan),
    ("english_loan", GoldLabel::EnLoan),
    ("english_loanword", GoldLabel::EnLoan),
];

const NEOLOGY_ALIASES: &[(&str, NeologyLabel)] = &[
    ("yes", NeologyLabel::Yes),
    ("no", NeologyLabel::No),
];

/// Case-folded alias → canonical label, one table per task.
#[derive(Debug, Clone)]
pub struct NormalizationTable {
    classify: HashMap<String, GoldLabel>,
    neology: HashMap<String, NeologyLabel>,
}

impl Default for NormalizationTable {
    fn default() -> Self {
        NormalizationTable {
            classify: CLASSIFY_ALIASES.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            neology: NEOLOGY_ALIASES.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

/// Lookup key: lowercase, with spaces and hyphens folded to `_`.
fn fold(alias: &str) -> String {
    alias
        .trim()
        .to_lowercase()
        .split(|c: char| c.is_whitespace() || c == '-')
        .filter(|s| !s.is_empty())
        .collect::<Vec<_>>()
        .join("_")
}

impl NormalizationTable {
    /// Add `alias<TAB>canonical` lines. The canonical side decides the task
    /// (`YES`/`NO` go to neology).
    pub fn extend_from_str(&mut self, text: &str, name: &str) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (alias, canonical) = line
                .split_once('\t')
                .ok_or_else(|| Error::schema(name, i + 1, "expected `alias<TAB>canonical`"))?;
            match canonical.trim() {
                "YES" => {
                    self.neology.insert(fold(alias), NeologyLabel::Yes);
                }
                "NO" => {
                    self.neology.insert(fold(alias), NeologyLabel::No);
                }
                other => {
                    let label: GoldLabel = other
                        .parse()
                        .map_err(|e: Error| Error::schema(name, i + 1, e.to_string()))?;
                    if label == GoldLabel::CodeSwitch {
                        return Err(Error::schema(name, i + 1, "CODE_SWITCH is not an answer label"));
                    }
                    self.classify.insert(fold(alias), label);
                }
            }
        }
        Ok(())
    }

    pub fn load_extended(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut table = Self::default();
        table.extend_from_str(&text, &path.display().to_string())?;
        Ok(table)
    }

    fn lookup(&self, candidate: &str, task: Task) -> Option<Answer> {
        let key = fold(candidate);
        if key.is_empty() {
            return None;
        }
        match task {
            Task::Classify => self.classify.get(&key).copied().map(Answer::Class),
            Task::Neology => self.neology.get(&key).copied().map(Answer::Neology),
        }
    }

    /// Resolve one line: the whole cleaned line first, then a leading label
    /// word when it is set off by punctuation ("YES. Because ...").
    fn resolve_line(&self, line: &str, task: Task) -> Option<Answer> {
        let cleaned = clean_line(line);
        if let Some(a) = self.lookup(&cleaned, task) {
            return Some(a);
        }
        let end = cleaned.find(|c: char| !(c.is_alphanumeric() || c == '_'))?;
        let rest = cleaned[end..].trim_start_matches(' ');
        let delimited = rest
            .chars()
            .next()
            .is_some_and(|c| matches!(c, '.' | ',' | ':' | ';' | '-' | '–' | '—' | '(' | '!'));
        if delimited {
            self.lookup(&cleaned[..end], task)
        } else {
            None
        }
    }
}

const STRIP: &[char] = &['.', ',', ':', ';', '*', '"', '\'', '`', '_', '#', '!', '>', '[', ']'];

fn strip_decoration(s: &str) -> &str {
    s.trim().trim_matches(|c: char| STRIP.contains(&c) || c.is_whitespace())
}

fn clean_line(line: &str) -> String {
    let mut s = strip_decoration(line);
    for prefix in ["label", "answer", "final answer"] {
        if s.len() > prefix.len()
            && s.is_char_boundary(prefix.len())
            && s[..prefix.len()].eq_ignore_ascii_case(prefix)
        {
            let rest = s[prefix.len()..].trim_start_matches(['*', ' ']);
            if let Some(after) = rest.strip_prefix(':') {
                s = strip_decoration(after);
                break;
            }
        }
    }
    s.to_string()
}

/// Remove `<think>…</think>` spans. An unclosed opener removes through the
/// end; a closer without opener removes everything before it.
pub fn strip_reasoning(raw: &str) -> String {
    const OPEN: &str = "<think>";
    const CLOSE: &str = "</think>";
    let mut out = String::with_capacity(raw.len());
    let mut rest = raw;
    loop {
        let open = rest.find(OPEN);
        let close = rest.find(CLOSE);
        match (open, close) {
            (Some(o), c) if c.is_none_or(|c| o < c) => {
                out.push_str(&rest[..o]);
                match rest[o..].find(CLOSE) {
                    Some(c) => rest = &rest[o + c + CLOSE.len()..],
                    None => return out,
                }
            }
            (_, Some(c)) => {
                // stray closer: the preceding text was reasoning
                out.clear();
                rest = &rest[c + CLOSE.len()..];
            }
            (None, None) => {
                out.push_str(rest);
                return out;
            }
            (Some(_), None) => unreachable!("handled by first arm"),
        }
    }
}

/// Map raw model output to a canonical label, or `PARSE_ERROR`.
pub fn parse(raw: &str, task: Task, table: &NormalizationTable) -> Answer {
    let text = strip_reasoning(raw);
    let mut lines = text.lines().filter(|l| !strip_decoration(l).is_empty());
    let first = lines.next();
    let last = lines.next_back();
    first
        .and_then(|l| table.resolve_line(l, task))
        .or_else(|| last.and_then(|l| table.resolve_line(l, task)))
        .unwrap_or(Answer::ParseError)
}

/// Share of `PARSE_ERROR` among the given parsed labels.
pub fn parse_rate<'a>(answers: impl IntoIterator<Item = &'a Answer>) -> Result<f64> {
    let (mut total, mut errors) = (0usize, 0usize);
    for a in answers {
        total += 1;
        errors += usize::from(*a == Answer::ParseError);
    }
    if total == 0 {
        return Err(Error::Empty("prediction file has no records".into()));
    }
    Ok(errors as f64 / total as f64)
}
