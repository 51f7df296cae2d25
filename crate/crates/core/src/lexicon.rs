//! Loanword lexicon (dictionary extract) and the surface-matching rule
//! shared by benchmark flagging and graph retrieval.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::Donor;
use crate::text::normalize_key;

/// One line of the lexicon file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub lemma: String,
    pub donor: Donor,
    pub donor_form: String,
    #[serde(default)]
    pub pos: String,
    #[serde(default)]
    pub definition: String,
    #[serde(default)]
    pub etymology: String,
    #[serde(default)]
    pub patterns: Vec<String>,
}

impl LexiconEntry {
    /// Definition and etymology are both present.
    pub fn is_complete(&self) -> bool {
        !self.definition.trim().is_empty() && !self.etymology.trim().is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    entries: Vec<LexiconEntry>,
    exact: HashMap<String, usize>,
    folded: HashMap<String, usize>,
}

impl Lexicon {
    pub fn new(entries: Vec<LexiconEntry>) -> Self {
        let mut exact = HashMap::new();
        let mut folded = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            exact.entry(e.lemma.clone()).or_insert(i);
            folded.entry(normalize_key(&e.lemma)).or_insert(i);
        }
        Lexicon {
            entries,
            exact,
            folded,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(BufReader::new(file), &path.display().to_string())
    }

    pub fn from_reader(reader: impl BufRead, name: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::io(name, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: LexiconEntry =
                serde_json::from_str(&line).map_err(|e| Error::schema(name, i + 1, e.to_string()))?;
            if entry.lemma.trim().is_empty() {
                return Err(Error::schema(name, i + 1, "field `lemma` is empty"));
            }
            entries.push(entry);
        }
        Ok(Self::new(entries))
    }

    pub fn entries(&self) -> &[LexiconEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Exact surface match, then case-folded match, then lemma match.
    pub fn lookup(&self, surface: &str, lemma: Option<&str>) -> Option<&LexiconEntry> {
        let idx = self
            .exact
            .get(surface)
            .or_else(|| self.folded.get(&normalize_key(surface)))
            .or_else(|| {
                let lemma = lemma?;
                self.exact
                    .get(lemma)
                    .or_else(|| self.folded.get(&normalize_key(lemma)))
            })?;
        Some(&self.entries[*idx])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(lemma: &str, def: &str, ety: &str) -> LexiconEntry {
        LexiconEntry {
            lemma: lemma.into(),
            donor: Donor::Fr,
            donor_form: "x".into(),
            pos: "noun".into(),
            definition: def.into(),
            etymology: ety.into(),
            patterns: vec![],
        }
    }

    #[test]
    fn match_precedence() {
        let lex = Lexicon::new(vec![
            entry("Garage", "a", "b"),
            entry("garage", "", ""),
            entry("Pompjee", "d", "e"),
        ]);
        assert!(lex.lookup("Garage", None).unwrap().is_complete());
        assert!(!lex.lookup("garage", None).unwrap().is_complete());
        assert_eq!(lex.lookup("GARAGE", None).unwrap().lemma, "Garage");
        assert!(lex.lookup("Pompjeeën", None).is_none());
        assert_eq!(lex.lookup("Pompjeeën", Some("Pompjee")).unwrap().lemma, "Pompjee");
    }

    #[test]
    fn schema_errors_name_the_line() {
        let data = "{\"lemma\":\"a\",\"donor\":\"FR\",\"donor_form\":\"a\"}\n{\"lemma\":\"b\",\"donor\":\"IT\",\"donor_form\":\"b\"}\n";
        let err = Lexicon::from_reader(data.as_bytes(), "lex.jsonl").unwrap_err();
        assert!(err.to_string().starts_with("lex.jsonl:2:"), "{err}");
    }
}
