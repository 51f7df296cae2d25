use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::io::BufRead;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::GoldLabel;
use crate::text::{char_slice, normalize_key};

/// One annotated token from the source corpus.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SourceToken {
    pub sentence: String,
    pub token: String,
    pub start: usize,
    pub end: usize,
    pub gold: GoldLabel,
    pub confidence: f64,
    #[serde(default)]
    pub morph_evidence: Vec<String>,
    #[serde(default)]
    pub section: String,
    pub published: NaiveDate,
    #[serde(default)]
    pub is_named_entity: bool,
    #[serde(default)]
    pub is_function_word: bool,
    #[serde(default)]
    pub is_punctuation: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lemma: Option<String>,
    /// Unknown source fields, kept but unused.
    #[serde(flatten)]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl SourceToken {
    /// Checks the record-level invariants; returns the first violation.
    pub fn check(&self) -> std::result::Result<(), String> {
        match char_slice(&self.sentence, self.start, self.end) {
            Some(s) if s == self.token => {}
            Some(s) => {
                return Err(format!(
                    "sentence[{}..{}] is `{s}`, expected `{}`",
                    self.start, self.end, self.token
                ))
            }
            None => {
                return Err(format!(
                    "offsets {}..{} out of range for sentence",
                    self.start, self.end
                ))
            }
        }
        let lo = NaiveDate::from_ymd_opt(1999, 1, 1).expect("valid date");
        let hi = NaiveDate::from_ymd_opt(2025, 12, 31).expect("valid date");
        if self.published < lo || self.published > hi {
            return Err(format!("published date {} outside 1999-2025", self.published));
        }
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(format!("confidence {} outside [0, 1]", self.confidence));
        }
        Ok(())
    }
}

/// A corpus line that could not be turned into a [`SourceToken`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub line: usize,
    pub reason: String,
}

/// Streams records from a JSON-lines corpus. Malformed lines come through as
/// `Err(Rejection)`; the stream itself never stops early.
pub fn read_corpus<R: BufRead>(
    reader: R,
) -> impl Iterator<Item = std::result::Result<SourceToken, Rejection>> {
    reader
        .lines()
        .enumerate()
        .filter_map(|(i, line)| {
            let line_no = i + 1;
            let line = match line {
                Ok(l) => l,
                Err(e) => {
                    return Some(Err(Rejection {
                        line: line_no,
                        reason: e.to_string(),
                    }))
                }
            };
            if line.trim().is_empty() {
                return None;
            }
            let parsed = serde_json::from_str::<SourceToken>(&line)
                .map_err(|e| e.to_string())
                .and_then(|t| t.check().map(|_| t));
            Some(parsed.map_err(|reason| Rejection {
                line: line_no,
                reason,
            }))
        })
}

/// One word per line; blank lines and `#` comments ignored. Words are
/// stored normalized.
pub fn load_function_words(path: &Path) -> Result<HashSet<String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(normalize_key)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn malformed_lines_are_rejected_not_fatal() {
        let corpus = r#"{"sentence":"Hien ass do.","token":"ass","start":5,"end":8,"gold":"NATIVE","confidence":0.9,"published":"2001-02-03"}
not json
{"sentence":"Hien ass do.","token":"ass","start":4,"end":8,"gold":"NATIVE","confidence":0.9,"published":"2001-02-03"}
{"sentence":"Hien ass do.","token":"ass","start":5,"end":8,"gold":"IT_LOAN","confidence":0.9,"published":"2001-02-03"}
{"sentence":"Hien ass do.","token":"ass","start":5,"end":8,"gold":"NATIVE","confidence":0.9,"published":"1998-02-03"}

{"sentence":"Hien ass do.","token":"do","start":9,"end":11,"gold":"NATIVE","confidence":1.0,"published":"2020-02-03","source_url":"x"}
"#;
        let items: Vec<_> = read_corpus(corpus.as_bytes()).collect();
        assert_eq!(items.len(), 6);
        let ok: Vec<_> = items.iter().filter_map(|r| r.as_ref().ok()).collect();
        assert_eq!(ok.len(), 2);
        let rejected: Vec<usize> = items
            .iter()
            .filter_map(|r| r.as_ref().err().map(|e| e.line))
            .collect();
        assert_eq!(rejected, vec![2, 3, 4, 5]);
        assert_eq!(ok[1].extra.get("source_url").unwrap(), "x");
    }
}
