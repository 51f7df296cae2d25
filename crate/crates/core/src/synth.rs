//! Deterministic synthetic corpora for demos, tests and smoke runs.

use std::collections::BTreeMap;
use std::io::Write;

use chrono::{Days, NaiveDate};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bench::SourceToken;
use crate::error::Result;
use crate::label::GoldLabel;

const NATIVE: &[&str] = &["Haus", "Kanner", "Bam", "Wieder", "Schoul", "Gaart", "Dag", "Nuecht", "Stad", "Frënd"];
const FR: &[(&str, &str)] = &[
    ("abord", "éieren"),
    ("reform", "éieren"),
    ("organis", "éieren"),
    ("Restaura", "tioun"),
    ("Qualit", "éit"),
    ("Pompj", "eeën"),
    ("Coiff", "euse"),
];
const DE: &[(&str, &str)] = &[("Ausstell", "ung"), ("Verwalt", "ung"), ("Frei", "heet"), ("Gesell", "schaft")];
const EN: &[(&str, &str)] = &[("gestream", "t"), ("Meet", "ing"), ("Updat", "e"), ("Podcast", "en")];
const CODE_SWITCH: &[&str] = &["c'est la vie", "by the way", "sowieso", "n'importe quoi"];
const FUNCTION: &[&str] = &["an", "den", "et", "mat", "fir", "op"];
const ENTITIES: &[&str] = &["Lëtzebuerg", "Esch", "Diekrech", "Mosel"];
const SECTIONS: &[&str] = &["Politik", "Kultur", "Sport", "Wirtschaft", "Regioun"];
const EVIDENCE: &[&str] = &["fr_eieren", "fr_tioun", "de_ung", "en_ing"];

/// What to generate. Noise tokens are all removed by the builder's filters.
#[derive(Debug, Clone)]
pub struct SynthSpec {
    pub counts: BTreeMap<GoldLabel, usize>,
    pub punctuation: usize,
    pub function_words: usize,
    pub named_entities: usize,
    /// Class tokens with confidence below 0.8.
    pub low_confidence: usize,
    pub seed: u64,
}

impl SynthSpec {
    /// Class counts shaped like a real corpus: three large classes, a tiny
    /// English class and a small code-switch stratum.
    pub fn realistic(scale: usize, seed: u64) -> Self {
        let counts = BTreeMap::from([
            (GoldLabel::Native, 2 * scale),
            (GoldLabel::FrLoan, scale + scale / 2),
            (GoldLabel::DeLoan, scale + scale / 5),
            (GoldLabel::EnLoan, 24),
            (GoldLabel::CodeSwitch, 80),
        ]);
        SynthSpec {
            counts,
            punctuation: scale,
            function_words: scale,
            named_entities: scale / 4,
            low_confidence: scale / 4,
            seed,
        }
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum::<usize>() + self.punctuation + self.function_words + self.named_entities + self.low_confidence
    }
}

fn surface(label: GoldLabel, rng: &mut ChaCha8Rng) -> String {
    let join = |parts: &[(&str, &str)], rng: &mut ChaCha8Rng| {
        let (a, b) = parts.choose(rng).expect("non-empty list");
        format!("{a}{b}")
    };
    match label {
        GoldLabel::Native => NATIVE.choose(rng).expect("non-empty list").to_string(),
        GoldLabel::FrLoan => join(FR, rng),
        GoldLabel::DeLoan => join(DE, rng),
        GoldLabel::EnLoan => join(EN, rng),
        GoldLabel::CodeSwitch => CODE_SWITCH.choose(rng).expect("non-empty list").to_string(),
    }
}

fn token(n: usize, word: &str, gold: GoldLabel, rng: &mut ChaCha8Rng) -> SourceToken {
    let prefix = format!("Am Bericht {n} gëtt ");
    let sentence = format!("{prefix}{word} genannt.");
    let start = prefix.chars().count();
    let base = NaiveDate::from_ymd_opt(1999, 1, 1).expect("valid date");
    let published = base + Days::new(rng.random_range(0..9861));
    let evidence = if gold.is_loan() && rng.random_bool(0.5) {
        vec![EVIDENCE.choose(rng).expect("non-empty list").to_string()]
    } else {
        vec![]
    };
    SourceToken {
        start,
        end: start + word.chars().count(),
        token: word.to_string(),
        sentence,
        gold,
        confidence: rng.random_range(0.8..=1.0),
        morph_evidence: evidence,
        section: SECTIONS.choose(rng).expect("non-empty list").to_string(),
        published,
        is_named_entity: false,
        is_function_word: false,
        is_punctuation: false,
        lemma: None,
        extra: Default::default(),
    }
}

/// Generate the corpus, shuffled, with every sentence unique.
pub fn generate(spec: &SynthSpec) -> Vec<SourceToken> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(spec.total());
    let mut n = 0;
    let mut next = |out: &mut Vec<SourceToken>, word: String, gold: GoldLabel, rng: &mut ChaCha8Rng| {
        n += 1;
        let t = token(n, &word, gold, rng);
        out.push(t);
        out.len() - 1
    };
    for (&label, &count) in &spec.counts {
        for _ in 0..count {
            let w = surface(label, &mut rng);
            next(&mut out, w, label, &mut rng);
        }
    }
    for _ in 0..spec.punctuation {
        let i = next(&mut out, ",".into(), GoldLabel::Native, &mut rng);
        out[i].is_punctuation = true;
    }
    for _ in 0..spec.function_words {
        let w = FUNCTION.choose(&mut rng).expect("non-empty list").to_string();
        let i = next(&mut out, w, GoldLabel::Native, &mut rng);
        out[i].is_function_word = true;
    }
    for _ in 0..spec.named_entities {
        let w = ENTITIES.choose(&mut rng).expect("non-empty list").to_string();
        let i = next(&mut out, w, GoldLabel::Native, &mut rng);
        out[i].is_named_entity = true;
    }
    for _ in 0..spec.low_confidence {
        let label = [GoldLabel::Native, GoldLabel::FrLoan, GoldLabel::DeLoan][rng.random_range(0..3)];
        let w = surface(label, &mut rng);
        let i = next(&mut out, w, label, &mut rng);
        out[i].confidence = rng.random_range(0.0..0.8);
    }
    out.shuffle(&mut rng);
    out
}

/// Write tokens as JSON lines.
pub fn write_corpus(tokens: &[SourceToken], mut out: impl Write) -> Result<()> {
    for t in tokens {
        serde_json::to_writer(&mut out, t)?;
        out.write_all(b"\n").map_err(|e| crate::Error::io("<corpus>", e))?;
    }
    out.flush().map_err(|e| crate::Error::io("<corpus>", e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tokens_are_valid_and_deterministic() {
        let spec = SynthSpec::realistic(100, 3);
        let a = generate(&spec);
        assert_eq!(a.len(), spec.total());
        assert!(a.iter().all(|t| t.check().is_ok()));
        assert_eq!(a, generate(&spec));
        let en = a.iter().filter(|t| t.gold == GoldLabel::EnLoan).count();
        assert_eq!(en, 24);
    }
}
