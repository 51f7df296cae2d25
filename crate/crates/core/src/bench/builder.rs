use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::BufRead;

use log::warn;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::source::{read_corpus, Rejection, SourceToken};
use super::BenchmarkInstance;
use crate::error::{Error, Result};
use crate::label::GoldLabel;
use crate::lexicon::Lexicon;
use crate::text::normalize_key;

pub const DEFAULT_MIN_CONFIDENCE: f64 = 0.8;
pub const DEFAULT_MIN_CLASS_COUNT: usize = 50;

#[derive(Debug, Clone)]
pub struct FilterConfig {
    pub min_confidence: f64,
    /// Extra function words (normalized) on top of the corpus flags.
    pub function_words: HashSet<String>,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            min_confidence: DEFAULT_MIN_CONFIDENCE,
            function_words: HashSet::new(),
        }
    }
}

impl FilterConfig {
    fn keeps(&self, t: &SourceToken) -> bool {
        !t.is_punctuation
            && !t.is_function_word
            && !t.is_named_entity
            && t.confidence >= self.min_confidence
            && (self.function_words.is_empty()
                || !self.function_words.contains(&normalize_key(&t.token)))
    }
}

/// Drops punctuation, function words, named entities and low-confidence
/// labels. Order is preserved.
pub fn filter_pool<'a, I>(tokens: I, config: &'a FilterConfig) -> impl Iterator<Item = SourceToken> + 'a
where
    I: IntoIterator<Item = SourceToken>,
    I::IntoIter: 'a,
{
    tokens.into_iter().filter(move |t| config.keeps(t))
}

pub fn class_counts<'a>(pool: impl IntoIterator<Item = &'a SourceToken>) -> BTreeMap<GoldLabel, usize> {
    let mut counts = BTreeMap::new();
    for t in pool {
        *counts.entry(t.gold).or_insert(0) += 1;
    }
    counts
}

/// Labels with at least `min_count` pool instances. `CODE_SWITCH` is
/// diagnostic-only and never active.
pub fn apply_class_threshold(
    counts: &BTreeMap<GoldLabel, usize>,
    min_count: usize,
) -> Result<BTreeSet<GoldLabel>> {
    if min_count == 0 {
        return Err(Error::InvalidArgument("min_count must be at least 1".into()));
    }
    Ok(counts
        .iter()
        .filter(|(label, &n)| **label != GoldLabel::CodeSwitch && n >= min_count)
        .map(|(label, _)| *label)
        .collect())
}

#[derive(Debug, Clone)]
pub struct SamplingPlan {
    pub active: BTreeSet<GoldLabel>,
    pub per_class: usize,
    pub diagnostic_count: usize,
    pub seed: u64,
}

/// Uniform sampling without replacement per class.
///
/// Duplicate pool entries (same content id) are collapsed before sampling.
/// Output is grouped by label in canonical order; within a label, instances
/// keep their pool order.
pub fn sample_balanced(pool: &[SourceToken], plan: &SamplingPlan) -> Result<Vec<BenchmarkInstance>> {
    let mut seen = HashSet::new();
    let mut by_class: BTreeMap<GoldLabel, Vec<BenchmarkInstance>> = BTreeMap::new();
    for t in pool {
        let inst = BenchmarkInstance::from_source(t);
        if seen.insert(inst.id.clone()) {
            by_class.entry(t.gold).or_default().push(inst);
        }
    }

    let mut wanted: Vec<(GoldLabel, usize)> = plan.active.iter().map(|&l| (l, plan.per_class)).collect();
    if plan.diagnostic_count > 0 {
        wanted.push((GoldLabel::CodeSwitch, plan.diagnostic_count));
    }
    for &(label, n) in &wanted {
        let available = by_class.get(&label).map_or(0, Vec::len);
        if available < n {
            return Err(Error::InsufficientCandidates {
                label,
                needed: n,
                available,
            });
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut out = Vec::with_capacity(wanted.iter().map(|w| w.1).sum());
    for (label, n) in wanted {
        let candidates = by_class.remove(&label).unwrap_or_default();
        let mut picked = rand::seq::index::sample(&mut rng, candidates.len(), n).into_vec();
        picked.sort_unstable();
        let mut candidates: Vec<Option<BenchmarkInstance>> = candidates.into_iter().map(Some).collect();
        out.extend(picked.into_iter().filter_map(|i| candidates[i].take()));
    }
    Ok(out)
}

/// Flags instances whose token has a complete lexicon entry. Returns the
/// number flagged.
pub fn mark_lexicon_subset(instances: &mut [BenchmarkInstance], lexicon: &Lexicon) -> usize {
    let mut flagged = 0;
    for inst in instances.iter_mut() {
        inst.lexicon_complete = lexicon
            .lookup(&inst.token, inst.lemma.as_deref())
            .is_some_and(|e| e.is_complete());
        flagged += usize::from(inst.lexicon_complete);
    }
    flagged
}

#[derive(Debug, Clone)]
pub struct BuildConfig {
    pub filter: FilterConfig,
    pub min_class_count: usize,
    pub per_class: usize,
    pub diagnostic_count: usize,
    pub seed: u64,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            filter: FilterConfig::default(),
            min_class_count: DEFAULT_MIN_CLASS_COUNT,
            per_class: 1000,
            diagnostic_count: 50,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BuildOutcome {
    pub instances: Vec<BenchmarkInstance>,
    pub rejected: Vec<Rejection>,
    pub pool_counts: BTreeMap<GoldLabel, usize>,
    pub active: BTreeSet<GoldLabel>,
    pub lexicon_flagged: usize,
}

/// Full builder pipeline over a JSON-lines corpus.
pub fn build(corpus: impl BufRead, config: &BuildConfig, lexicon: Option<&Lexicon>) -> Result<BuildOutcome> {
    let mut rejected = Vec::new();
    let tokens = read_corpus(corpus).filter_map(|r| match r {
        Ok(t) => Some(t),
        Err(rej) => {
            warn!("corpus line {} rejected: {}", rej.line, rej.reason);
            rejected.push(rej);
            None
        }
    });
    let pool: Vec<SourceToken> = filter_pool(tokens, &config.filter).collect();
    let pool_counts = class_counts(&pool);
    let active = apply_class_threshold(&pool_counts, config.min_class_count)?;
    for (label, n) in &pool_counts {
        if *label != GoldLabel::CodeSwitch && !active.contains(label) {
            warn!("{label} dropped: {n} pool instances < {}", config.min_class_count);
        }
    }
    let mut instances = sample_balanced(
        &pool,
        &SamplingPlan {
            active: active.clone(),
            per_class: config.per_class,
            diagnostic_count: config.diagnostic_count,
            seed: config.seed,
        },
    )?;
    let lexicon_flagged = lexicon.map_or(0, |lex| mark_lexicon_subset(&mut instances, lex));
    Ok(BuildOutcome {
        instances,
        rejected,
        pool_counts,
        active,
        lexicon_flagged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::label::{Donor, Era, NeologyLabel};
    use crate::lexicon::LexiconEntry;
    use chrono::NaiveDate;

    fn tok(word: &str, gold: GoldLabel, conf: f64, year: i32) -> SourceToken {
        let sentence = format!("Hei steet {word} am Saz.");
        SourceToken {
            sentence,
            token: word.to_string(),
            start: 10,
            end: 10 + word.chars().count(),
            gold,
            confidence: conf,
            morph_evidence: vec![],
            section: "Politik".into(),
            published: NaiveDate::from_ymd_opt(year, 5, 1).unwrap(),
            is_named_entity: false,
            is_function_word: false,
            is_punctuation: false,
            lemma: None,
            extra: Default::default(),
        }
    }

    #[test]
    fn punctuation_dropped_clean_token_kept() {
        let mut p = tok(",", GoldLabel::Native, 1.0, 2000);
        p.is_punctuation = true;
        let clean = tok("Haus", GoldLabel::Native, 1.0, 2000);
        let cfg = FilterConfig::default();
        let kept: Vec<_> = filter_pool(vec![p, clean.clone()], &cfg).collect();
        assert_eq!(kept, vec![clean]);
    }

    #[test]
    fn ten_token_fixture_keeps_five() {
        // 3 function words, 2 below threshold, 5 clean.
        let mut tokens = Vec::new();
        for w in ["an", "vun", "mat"] {
            let mut t = tok(w, GoldLabel::Native, 0.95, 2001);
            t.is_function_word = true;
            tokens.push(t);
        }
        tokens.push(tok("Regierung", GoldLabel::DeLoan, 0.79, 2003));
        tokens.push(tok("Garage", GoldLabel::FrLoan, 0.5, 2003));
        for w in ["Haus", "Bam", "Gaart", "Informatioun", "Ausstellung"] {
            tokens.push(tok(w, GoldLabel::Native, 0.8, 2010));
        }
        let kept: Vec<String> = filter_pool(tokens, &FilterConfig::default())
            .map(|t| t.token)
            .collect();
        assert_eq!(kept, ["Haus", "Bam", "Gaart", "Informatioun", "Ausstellung"]);
    }

    #[test]
    fn external_function_word_list() {
        let cfg = FilterConfig {
            function_words: ["awer".to_string()].into_iter().collect(),
            ..Default::default()
        };
        let kept: Vec<_> = filter_pool(
            vec![tok("Awer", GoldLabel::Native, 1.0, 2000), tok("Bam", GoldLabel::Native, 1.0, 2000)],
            &cfg,
        )
        .collect();
        assert_eq!(kept.len(), 1);
        assert_eq!(kept[0].token, "Bam");
    }

    #[test]
    fn class_threshold_examples() {
        let counts: BTreeMap<_, _> = [
            (GoldLabel::Native, 9000),
            (GoldLabel::FrLoan, 8000),
            (GoldLabel::DeLoan, 7000),
            (GoldLabel::EnLoan, 24),
            (GoldLabel::CodeSwitch, 900),
        ]
        .into();
        let active = apply_class_threshold(&counts, 50).unwrap();
        assert_eq!(
            active,
            [GoldLabel::Native, GoldLabel::FrLoan, GoldLabel::DeLoan].into()
        );

        let boundary: BTreeMap<_, _> = [(GoldLabel::Native, 50)].into();
        assert_eq!(apply_class_threshold(&boundary, 50).unwrap(), [GoldLabel::Native].into());

        let below: BTreeMap<_, _> = [(GoldLabel::FrLoan, 49)].into();
        assert!(apply_class_threshold(&below, 50).unwrap().is_empty());

        assert!(apply_class_threshold(&BTreeMap::new(), 50).unwrap().is_empty());
        assert!(apply_class_threshold(&counts, 0).is_err());
    }

    fn pool(n_per: usize) -> Vec<SourceToken> {
        let mut out = Vec::new();
        for (label, prefix) in [
            (GoldLabel::Native, "nat"),
            (GoldLabel::FrLoan, "fr"),
            (GoldLabel::DeLoan, "de"),
            (GoldLabel::CodeSwitch, "cs"),
        ] {
            for i in 0..n_per {
                out.push(tok(&format!("{prefix}{i}"), label, 1.0, 2000 + (i % 20) as i32));
            }
        }
        out
    }

    #[test]
    fn sampling_counts_and_determinism() {
        let pool = pool(40);
        let plan = SamplingPlan {
            active: [GoldLabel::Native, GoldLabel::FrLoan, GoldLabel::DeLoan].into(),
            per_class: 10,
            diagnostic_count: 5,
            seed: 7,
        };
        let a = sample_balanced(&pool, &plan).unwrap();
        let b = sample_balanced(&pool, &plan).unwrap();
        assert_eq!(a.len(), 35);
        assert_eq!(
            a.iter().map(|i| &i.id).collect::<Vec<_>>(),
            b.iter().map(|i| &i.id).collect::<Vec<_>>()
        );
        let counts = a.iter().fold(BTreeMap::new(), |mut m, i| {
            *m.entry(i.gold).or_insert(0) += 1;
            m
        });
        assert_eq!(counts[&GoldLabel::CodeSwitch], 5);
        assert_eq!(counts[&GoldLabel::Native], 10);
        for inst in &a {
            assert_eq!(inst.era == Era::Established, inst.published.year() < 2015);
            if inst.gold != GoldLabel::CodeSwitch {
                assert_eq!(inst.neology_gold == NeologyLabel::Yes, inst.gold != GoldLabel::Native);
            }
        }
        let other = sample_balanced(&pool, &SamplingPlan { seed: 8, ..plan }).unwrap();
        assert_ne!(
            a.iter().map(|i| &i.id).collect::<Vec<_>>(),
            other.iter().map(|i| &i.id).collect::<Vec<_>>()
        );
    }

    use chrono::Datelike;

    #[test]
    fn zero_per_class_gives_diagnostic_only() {
        let plan = SamplingPlan {
            active: [GoldLabel::Native].into(),
            per_class: 0,
            diagnostic_count: 3,
            seed: 1,
        };
        let out = sample_balanced(&pool(5), &plan).unwrap();
        assert_eq!(out.len(), 3);
        assert!(out.iter().all(|i| i.gold == GoldLabel::CodeSwitch));
    }

    #[test]
    fn shortfall_names_class() {
        let plan = SamplingPlan {
            active: [GoldLabel::FrLoan].into(),
            per_class: 50,
            diagnostic_count: 0,
            seed: 1,
        };
        let err = sample_balanced(&pool(40), &plan).unwrap_err();
        assert!(matches!(
            err,
            Error::InsufficientCandidates { label: GoldLabel::FrLoan, needed: 50, available: 40 }
        ));
        assert!(err.to_string().contains("FR_LOAN"));
        assert!(err.to_string().contains("short by 10"));
    }

    #[test]
    fn duplicates_collapse_before_sampling() {
        let t = tok("Bam", GoldLabel::Native, 1.0, 2000);
        let plan = SamplingPlan {
            active: [GoldLabel::Native].into(),
            per_class: 2,
            diagnostic_count: 0,
            seed: 1,
        };
        assert!(sample_balanced(&[t.clone(), t], &plan).is_err());
    }

    #[test]
    fn lexicon_subset_flags_by_lookup() {
        let entry = |lemma: &str, def: &str| LexiconEntry {
            lemma: lemma.into(),
            donor: Donor::Fr,
            donor_form: lemma.to_lowercase(),
            pos: "noun".into(),
            definition: def.into(),
            etymology: "from French".into(),
            patterns: vec![],
        };
        let lex = Lexicon::new(vec![entry("Garage", "a building"), entry("garer", "to park"), entry("Bic", "")]);
        let mut insts: Vec<BenchmarkInstance> = [
            "Garage", "garage", "Bam", "Haus", "Bic", "Gaart", "Dag", "Kand", "Kaz", "Stuhl",
        ]
        .iter()
        .map(|w| BenchmarkInstance::from_source(&tok(w, GoldLabel::FrLoan, 1.0, 2000)))
        .collect();
        insts[6].lemma = Some("garer".into());
        let flagged = mark_lexicon_subset(&mut insts, &lex);
        assert_eq!(flagged, 3);
        let flags: Vec<bool> = insts.iter().map(|i| i.lexicon_complete).collect();
        assert_eq!(
            flags,
            [true, true, false, false, false, false, true, false, false, false]
        );
    }
}
