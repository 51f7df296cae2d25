//! Benchmark construction: corpus ingestion, filtering, class thresholds,
//! balanced sampling and lexicon-subset flagging.

mod builder;
mod source;

pub use builder::{
    apply_class_threshold, build, class_counts, filter_pool, mark_lexicon_subset, sample_balanced,
    BuildConfig, BuildOutcome, FilterConfig, SamplingPlan, DEFAULT_MIN_CLASS_COUNT,
    DEFAULT_MIN_CONFIDENCE,
};
pub use source::{load_function_words, read_corpus, Rejection, SourceToken};

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::label::{Era, GoldLabel, NeologyLabel};
use crate::text::{char_slice, sha256_hex};

/// First day of the RECENT era.
pub fn era_boundary() -> NaiveDate {
    NaiveDate::from_ymd_opt(2015, 1, 1).expect("valid date")
}

pub fn era_of(published: NaiveDate) -> Era {
    if published < era_boundary() {
        Era::Established
    } else {
        Era::Recent
    }
}

/// Content hash of (sentence, start, end, published), 16 hex digits.
pub fn instance_id(sentence: &str, start: usize, end: usize, published: NaiveDate) -> String {
    let hash = sha256_hex(&[
        sentence,
        &start.to_string(),
        &end.to_string(),
        &published.format("%Y-%m-%d").to_string(),
    ]);
    hash[..16].to_string()
}

/// One evaluation item. Field order is the on-disk order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BenchmarkInstance {
    pub id: String,
    pub sentence: String,
    pub token: String,
    pub start: usize,
    pub end: usize,
    pub gold: GoldLabel,
    pub era: Era,
    pub neology_gold: NeologyLabel,
    pub morph_evidence: Vec<String>,
    pub section: String,
    pub published: NaiveDate,
    #[serde(default)]
    pub lemma: Option<String>,
    #[serde(default)]
    pub lexicon_complete: bool,
}

impl BenchmarkInstance {
    pub fn from_source(token: &SourceToken) -> Self {
        BenchmarkInstance {
            id: instance_id(&token.sentence, token.start, token.end, token.published),
            sentence: token.sentence.clone(),
            token: token.token.clone(),
            start: token.start,
            end: token.end,
            gold: token.gold,
            era: era_of(token.published),
            // Code-switches carry YES but are excluded from neology scoring.
            neology_gold: token.gold.neology().unwrap_or(NeologyLabel::Yes),
            morph_evidence: token.morph_evidence.clone(),
            section: token.section.clone(),
            published: token.published,
            lemma: token.lemma.clone(),
            lexicon_complete: false,
        }
    }

    /// Checks offsets against the sentence.
    pub fn span_is_consistent(&self) -> bool {
        char_slice(&self.sentence, self.start, self.end) == Some(self.token.as_str())
    }
}

/// A loaded benchmark with an id index.
#[derive(Debug, Clone, Default)]
pub struct Benchmark {
    instances: Vec<BenchmarkInstance>,
    index: HashMap<String, usize>,
}

impl Benchmark {
    pub fn new(instances: Vec<BenchmarkInstance>) -> Result<Self> {
        let mut index = HashMap::with_capacity(instances.len());
        for (i, inst) in instances.iter().enumerate() {
            if index.insert(inst.id.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "duplicate benchmark id `{}`",
                    inst.id
                )));
            }
        }
        Ok(Benchmark { instances, index })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let name = path.display().to_string();
        let mut instances = Vec::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let inst: BenchmarkInstance =
                serde_json::from_str(&line).map_err(|e| Error::schema(&name, i + 1, e.to_string()))?;
            if !inst.span_is_consistent() {
                return Err(Error::schema(
                    &name,
                    i + 1,
                    format!("token `{}` does not match sentence offsets", inst.token),
                ));
            }
            instances.push(inst);
        }
        Self::new(instances)
    }

    pub fn instances(&self) -> &[BenchmarkInstance] {
        &self.instances
    }

    pub fn get(&self, id: &str) -> Option<&BenchmarkInstance> {
        self.index.get(id).map(|&i| &self.instances[i])
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }
}

/// Serialize instances as JSON lines.
pub fn write_benchmark(instances: &[BenchmarkInstance], out: impl Write) -> Result<()> {
    let mut out = BufWriter::new(out);
    for inst in instances {
        serde_json::to_writer(&mut out, inst)?;
        out.write_all(b"\n").map_err(|e| Error::io("<benchmark>", e))?;
    }
    out.flush().map_err(|e| Error::io("<benchmark>", e))?;
    Ok(())
}

pub fn save_benchmark(instances: &[BenchmarkInstance], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_benchmark(instances, file)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn era_boundary_assigns_2015_to_recent() {
        let d = |y, m, dd| NaiveDate::from_ymd_opt(y, m, dd).unwrap();
        assert_eq!(era_of(d(2014, 12, 31)), Era::Established);
        assert_eq!(era_of(d(2015, 1, 1)), Era::Recent);
        assert_eq!(era_of(d(2015, 6, 30)), Era::Recent);
        assert_eq!(era_of(d(1999, 1, 1)), Era::Established);
    }

    #[test]
    fn ids_are_stable_content_hashes() {
        let d = NaiveDate::from_ymd_opt(2010, 3, 4).unwrap();
        let a = instance_id("Eng Phrase.", 0, 3, d);
        assert_eq!(a, instance_id("Eng Phrase.", 0, 3, d));
        assert_ne!(a, instance_id("Eng Phrase.", 4, 10, d));
        assert_eq!(a.len(), 16);
    }
}
