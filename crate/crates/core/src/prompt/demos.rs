use std::collections::HashSet;

use crate::bench::BenchmarkInstance;
use crate::error::{Error, Result};
use crate::label::GoldLabel;
use crate::text::normalize_key;

/// A worked example shown to few-shot prompts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Demo {
    pub sentence: String,
    pub token: String,
    pub label: GoldLabel,
    pub justification: String,
}

impl Demo {
    fn new(sentence: &str, token: &str, label: GoldLabel, justification: &str) -> Self {
        Demo {
            sentence: sentence.to_string(),
            token: token.to_string(),
            label,
            justification: justification.to_string(),
        }
    }
}

/// The five shipped demonstrations: two French loans, one each for German,
/// English and native. Only the Pompjeeën example is taken from published
/// material; the other four were written for this crate.
pub fn builtin_demos() -> Vec<Demo> {
    vec![
        Demo::new(
            "D'Pompjeeën hunn de Brand schnell ënnert Kontroll bruecht.",
            "Pompjeeën",
            GoldLabel::FrLoan,
            "'Pompjeeën' derives from French 'pompier', adapted with the Luxembourgish plural suffix \"-en\" and spelling \"ee\" for /e:/.",
        ),
        Demo::new(
            "D'Regierung wëll de Steiersystem grondleeënd reforméieren.",
            "reforméieren",
            GoldLabel::FrLoan,
            "'reforméieren' derives from French 'réformer', integrated with the productive Luxembourgish verb suffix \"-éieren\".",
        ),
        Demo::new(
            "D'Ausstellung am Musée ass nach bis Enn Mäerz op.",
            "Ausstellung",
            GoldLabel::DeLoan,
            "'Ausstellung' is taken over from German 'Ausstellung' with the German nominal suffix \"-ung\" left unchanged.",
        ),
        Demo::new(
            "De Concert gouf live am Internet gestreamt.",
            "gestreamt",
            GoldLabel::EnLoan,
            "'gestreamt' derives from English 'to stream', integrated into the Luxembourgish participle frame \"ge-...-t\".",
        ),
        Demo::new(
            "D'Kanner spille nomëttes am Gaart.",
            "Kanner",
            GoldLabel::Native,
            "'Kanner' is the inherited Luxembourgish plural of 'Kand' and shows no donor-language adaptation.",
        ),
    ]
}

/// Fails if any demo sentence also occurs as a benchmark sentence.
pub fn check_disjoint(demos: &[Demo], instances: &[BenchmarkInstance]) -> Result<()> {
    let sentences: HashSet<String> = instances.iter().map(|i| normalize_key(&i.sentence)).collect();
    let clashes: Vec<&str> = demos
        .iter()
        .filter(|d| sentences.contains(&normalize_key(&d.sentence)))
        .map(|d| d.token.as_str())
        .collect();
    if clashes.is_empty() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "demonstrations overlap the benchmark: {}",
            clashes.join(", ")
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn label_distribution() {
        let demos = builtin_demos();
        assert_eq!(demos.len(), 5);
        let mut counts = BTreeMap::new();
        for d in &demos {
            *counts.entry(d.label).or_insert(0) += 1;
        }
        assert_eq!(counts[&GoldLabel::FrLoan], 2);
        assert_eq!(counts[&GoldLabel::DeLoan], 1);
        assert_eq!(counts[&GoldLabel::EnLoan], 1);
        assert_eq!(counts[&GoldLabel::Native], 1);
        let pomp = demos.iter().find(|d| d.token == "Pompjeeën").unwrap();
        assert_eq!(pomp.label, GoldLabel::FrLoan);
    }

    #[test]
    fn tokens_occur_in_sentences_without_markers() {
        for d in builtin_demos() {
            assert!(d.sentence.contains(&d.token), "{}", d.token);
            assert!(!d.sentence.contains("**") && !d.justification.contains("**"));
        }
    }
}
