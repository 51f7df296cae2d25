//! Metrics over prediction records joined to the benchmark.
//!
//! Rates are fractions in [0, 1]; [`points`] converts to one-decimal
//! percentages for display. PARSE_ERROR and NO_RESPONSE records only count
//! towards the excluded tallies.

mod series;

pub use series::{
    aggregate_confusion_pairs, score_run, write_delta_kg, write_en_distractor, write_native_fp_rates,
    write_per_class_f1, write_strategy_grid, write_summary, CellReport, ScoreRunOptions,
};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bench::Benchmark;
use crate::error::{Error, Result};
use crate::label::{Answer, Era, GoldLabel, NeologyLabel, Task};
use crate::runner::PredictionRecord;

/// A record's answer next to the gold data of its instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Judged {
    pub gold: GoldLabel,
    pub neology_gold: NeologyLabel,
    pub era: Era,
    pub answer: Answer,
}

/// Attach gold data to every record; unknown instances are an error.
pub fn join(bench: &Benchmark, records: &[PredictionRecord]) -> Result<Vec<Judged>> {
    records
        .iter()
        .map(|r| {
            let inst = bench
                .get(&r.instance_id)
                .ok_or_else(|| Error::UnknownInstance(r.instance_id.clone()))?;
            Ok(Judged {
                gold: inst.gold,
                neology_gold: inst.neology_gold,
                era: inst.era,
                answer: r.parsed_label,
            })
        })
        .collect()
}

/// One decimal place of a percentage, e.g. `0.8137 → 81.4`.
pub fn points(rate: f64) -> f64 {
    (rate * 1000.0).round() / 10.0
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

/// Valid classification predictions on non-diagnostic items.
fn headline(judged: &[Judged]) -> impl Iterator<Item = (&Judged, GoldLabel)> {
    judged
        .iter()
        .filter(|j| j.gold != GoldLabel::CodeSwitch)
        .filter_map(|j| j.answer.class().map(|p| (j, p)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub gold: Vec<GoldLabel>,
    pub predicted: Vec<GoldLabel>,
    /// `counts[g][p]`, indexed like `gold` and `predicted`.
    pub counts: Vec<Vec<u64>>,
    /// Records without a valid prediction.
    pub excluded: u64,
}

impl ConfusionMatrix {
    /// Gold rows cover all five labels (CODE_SWITCH included, as a
    /// diagnostic row); columns are the four answer labels.
    pub fn from_judged(judged: &[Judged]) -> Self {
        let gold = GoldLabel::ALL.to_vec();
        let predicted = GoldLabel::ANSWER_SPACE.to_vec();
        let mut counts = vec![vec![0u64; predicted.len()]; gold.len()];
        let mut excluded = 0;
        for j in judged {
            match j.answer.class() {
                Some(p) => {
                    let g = gold.iter().position(|&x| x == j.gold).expect("all labels");
                    let p = predicted.iter().position(|&x| x == p).expect("answer label");
                    counts[g][p] += 1;
                }
                None => excluded += 1,
            }
        }
        ConfusionMatrix {
            gold,
            predicted,
            counts,
            excluded,
        }
    }

    pub fn count(&self, gold: GoldLabel, predicted: GoldLabel) -> u64 {
        let g = self.gold.iter().position(|&x| x == gold);
        let p = self.predicted.iter().position(|&x| x == predicted);
        match (g, p) {
            (Some(g), Some(p)) => self.counts[g][p],
            _ => 0,
        }
    }

    pub fn row_sum(&self, gold: GoldLabel) -> u64 {
        self.predicted.iter().map(|&p| self.count(gold, p)).sum()
    }

    /// Valid records.
    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub support: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryReport {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnDistractor {
    pub en_pred: usize,
    pub to_nat: usize,
    pub to_fr: usize,
    pub to_de: usize,
    /// EN predictions on gold labels outside NATIVE/FR/DE (the diagnostic
    /// stratum, in practice).
    pub other: usize,
    pub valid: usize,
}

impl EnDistractor {
    pub fn rate(&self) -> f64 {
        ratio(self.en_pred, self.valid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TemporalReport {
    pub acc_established: Option<f64>,
    pub acc_recent: Option<f64>,
    pub gap: Option<f64>,
    pub n_established: usize,
    pub n_recent: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub accuracy: f64,
    pub balanced_accuracy: f64,
    pub macro_f1: f64,
    pub weighted_f1: f64,
    pub per_class: BTreeMap<GoldLabel, ClassMetrics>,
    pub binary: BinaryReport,
    pub donor_only_accuracy: Option<f64>,
    pub en_distractor: EnDistractor,
    pub temporal: TemporalReport,
    /// Share of valid NATIVE items predicted as any loan.
    pub native_false_positive_rate: Option<f64>,
    pub confusion: ConfusionMatrix,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeologyMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Recall on YES items, split by the gold borrowing label.
    pub recall_by_donor: BTreeMap<GoldLabel, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub task: Task,
    pub records: usize,
    /// Denominator of `accuracy`.
    pub valid: usize,
    pub parse_errors: usize,
    pub no_response: usize,
    pub parse_error_rate: f64,
    pub accuracy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassificationMetrics>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neology: Option<NeologyMetrics>,
    /// Accuracy gain over the zero-shot cell, in points.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_kg: Option<f64>,
}

fn check_task(records: &[PredictionRecord], task: Task) -> Result<()> {
    match records.iter().find(|r| r.task != task) {
        Some(r) => Err(Error::InvalidArgument(format!(
            "record for {} is a {} record, expected {task}",
            r.instance_id, r.task
        ))),
        None => Ok(()),
    }
}

fn tallies(judged: &[Judged]) -> (usize, usize) {
    let parse_errors = judged.iter().filter(|j| j.answer == Answer::ParseError).count();
    let no_response = judged.iter().filter(|j| j.answer == Answer::NoResponse).count();
    (parse_errors, no_response)
}

/// Headline multi-class metrics. Classes without gold support are left out
/// of the macro average.
pub fn classification_metrics(judged: &[Judged]) -> Result<ClassificationMetrics> {
    let mut support: BTreeMap<GoldLabel, usize> = BTreeMap::new();
    let mut predicted: BTreeMap<GoldLabel, usize> = BTreeMap::new();
    let mut hits: BTreeMap<GoldLabel, usize> = BTreeMap::new();
    let mut n = 0;
    for (j, p) in headline(judged) {
        n += 1;
        *support.entry(j.gold).or_default() += 1;
        *predicted.entry(p).or_default() += 1;
        if p == j.gold {
            *hits.entry(p).or_default() += 1;
        }
    }
    if n == 0 {
        return Err(Error::NoValidRecords);
    }
    let correct: usize = hits.values().sum();
    let per_class: BTreeMap<GoldLabel, ClassMetrics> = support
        .iter()
        .map(|(&c, &s)| {
            let tp = hits.get(&c).copied().unwrap_or(0);
            let precision = ratio(tp, predicted.get(&c).copied().unwrap_or(0));
            let recall = ratio(tp, s);
            (
                c,
                ClassMetrics {
                    precision,
                    recall,
                    f1: f1(precision, recall),
                    support: s,
                },
            )
        })
        .collect();
    let k = per_class.len() as f64;
    let native_fp = {
        let natives: Vec<GoldLabel> = headline(judged)
            .filter(|(j, _)| j.gold == GoldLabel::Native)
            .map(|(_, p)| p)
            .collect();
        (!natives.is_empty()).then(|| ratio(natives.iter().filter(|p| p.is_loan()).count(), natives.len()))
    };
    Ok(ClassificationMetrics {
        accuracy: ratio(correct, n),
        balanced_accuracy: per_class.values().map(|m| m.recall).sum::<f64>() / k,
        macro_f1: per_class.values().map(|m| m.f1).sum::<f64>() / k,
        weighted_f1: per_class.values().map(|m| m.f1 * m.support as f64).sum::<f64>() / n as f64,
        per_class,
        binary: binary_collapse(judged)?,
        donor_only_accuracy: donor_only(judged).ok(),
        en_distractor: en_distractor(judged),
        temporal: temporal_gap(judged),
        native_false_positive_rate: native_fp,
        confusion: ConfusionMatrix::from_judged(judged),
    })
}

/// NATIVE vs BORROWED, with BORROWED as the positive class.
pub fn binary_collapse(judged: &[Judged]) -> Result<BinaryReport> {
    let (mut n, mut correct, mut tp, mut pred_pos, mut gold_pos) = (0, 0, 0, 0, 0);
    for (j, p) in headline(judged) {
        let g = j.gold.is_loan();
        let p = p.is_loan();
        n += 1;
        correct += usize::from(g == p);
        tp += usize::from(g && p);
        pred_pos += usize::from(p);
        gold_pos += usize::from(g);
    }
    if n == 0 {
        return Err(Error::NoValidRecords);
    }
    let precision = ratio(tp, pred_pos);
    let recall = ratio(tp, gold_pos);
    Ok(BinaryReport {
        accuracy: ratio(correct, n),
        precision,
        recall,
        f1: f1(precision, recall),
        n,
    })
}

/// Accuracy on gold FR_LOAN/DE_LOAN items; any other prediction is wrong.
pub fn donor_only(judged: &[Judged]) -> Result<f64> {
    let subset: Vec<_> = headline(judged)
        .filter(|(j, _)| matches!(j.gold, GoldLabel::FrLoan | GoldLabel::DeLoan))
        .collect();
    if subset.is_empty() {
        return Err(Error::Empty("no FR_LOAN or DE_LOAN items".into()));
    }
    let correct = subset.iter().filter(|(j, p)| j.gold == *p).count();
    Ok(ratio(correct, subset.len()))
}

/// EN_LOAN predictions over all valid records, including the diagnostic
/// stratum.
pub fn en_distractor(judged: &[Judged]) -> EnDistractor {
    let mut row = EnDistractor {
        en_pred: 0,
        to_nat: 0,
        to_fr: 0,
        to_de: 0,
        other: 0,
        valid: 0,
    };
    for j in judged {
        let Some(p) = j.answer.class() else { continue };
        row.valid += 1;
        if p != GoldLabel::EnLoan {
            continue;
        }
        row.en_pred += 1;
        match j.gold {
            GoldLabel::Native => row.to_nat += 1,
            GoldLabel::FrLoan => row.to_fr += 1,
            GoldLabel::DeLoan => row.to_de += 1,
            _ => row.other += 1,
        }
    }
    row
}

/// Accuracy per era and the absolute gap; absent when an era is empty.
pub fn temporal_gap(judged: &[Judged]) -> TemporalReport {
    let (mut n_e, mut c_e, mut n_r, mut c_r) = (0, 0, 0, 0);
    for (j, p) in headline(judged) {
        let hit = usize::from(j.gold == p);
        match j.era {
            Era::Established => {
                n_e += 1;
                c_e += hit;
            }
            Era::Recent => {
                n_r += 1;
                c_r += hit;
            }
        }
    }
    let acc_established = (n_e > 0).then(|| ratio(c_e, n_e));
    let acc_recent = (n_r > 0).then(|| ratio(c_r, n_r));
    TemporalReport {
        acc_established,
        acc_recent,
        gap: acc_established.zip(acc_recent).map(|(a, b)| (a - b).abs()),
        n_established: n_e,
        n_recent: n_r,
    }
}

/// YES-positive metrics; CODE_SWITCH items are skipped.
pub fn neology_metrics(judged: &[Judged]) -> Result<NeologyMetrics> {
    let (mut n, mut correct, mut tp, mut pred_yes, mut gold_yes) = (0, 0, 0, 0, 0);
    let mut by_donor: BTreeMap<GoldLabel, (usize, usize)> = BTreeMap::new();
    for j in judged.iter().filter(|j| j.gold != GoldLabel::CodeSwitch) {
        let Some(p) = j.answer.neology() else { continue };
        let g = j.neology_gold == NeologyLabel::Yes;
        let p = p == NeologyLabel::Yes;
        n += 1;
        correct += usize::from(g == p);
        tp += usize::from(g && p);
        pred_yes += usize::from(p);
        gold_yes += usize::from(g);
        if g && j.gold.is_loan() {
            let e = by_donor.entry(j.gold).or_default();
            e.0 += 1;
            e.1 += usize::from(p);
        }
    }
    if n == 0 {
        return Err(Error::NoValidRecords);
    }
    let precision = ratio(tp, pred_yes);
    let recall = ratio(tp, gold_yes);
    Ok(NeologyMetrics {
        accuracy: ratio(correct, n),
        precision,
        recall,
        f1: f1(precision, recall),
        recall_by_donor: by_donor.into_iter().map(|(k, (total, hit))| (k, ratio(hit, total))).collect(),
    })
}

pub fn score_classification(bench: &Benchmark, records: &[PredictionRecord]) -> Result<ScoreReport> {
    check_task(records, Task::Classify)?;
    let judged = join(bench, records)?;
    let metrics = classification_metrics(&judged)?;
    let (parse_errors, no_response) = tallies(&judged);
    Ok(ScoreReport {
        task: Task::Classify,
        records: records.len(),
        valid: headline(&judged).count(),
        parse_errors,
        no_response,
        parse_error_rate: ratio(parse_errors, records.len()),
        accuracy: metrics.accuracy,
        classification: Some(metrics),
        neology: None,
        delta_kg: None,
    })
}

pub fn score_neology(bench: &Benchmark, records: &[PredictionRecord]) -> Result<ScoreReport> {
    check_task(records, Task::Neology)?;
    let judged = join(bench, records)?;
    let metrics = neology_metrics(&judged)?;
    let (parse_errors, no_response) = tallies(&judged);
    let valid = judged
        .iter()
        .filter(|j| j.gold != GoldLabel::CodeSwitch && j.answer.neology().is_some())
        .count();
    Ok(ScoreReport {
        task: Task::Neology,
        records: records.len(),
        valid,
        parse_errors,
        no_response,
        parse_error_rate: ratio(parse_errors, records.len()),
        accuracy: metrics.accuracy,
        classification: None,
        neology: Some(metrics),
        delta_kg: None,
    })
}

pub fn score(bench: &Benchmark, records: &[PredictionRecord], task: Task) -> Result<ScoreReport> {
    match task {
        Task::Classify => score_classification(bench, records),
        Task::Neology => score_neology(bench, records),
    }
}

/// Accuracy difference in percentage points, knowledge-graph minus
/// zero-shot.
pub fn delta_kg(kg: &ScoreReport, zero_shot: &ScoreReport) -> f64 {
    (kg.accuracy - zero_shot.accuracy) * 100.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionPair {
    pub gold: GoldLabel,
    pub predicted: GoldLabel,
    pub count: u64,
}

/// Off-diagonal cells summed over runs, most frequent first. The diagnostic
/// CODE_SWITCH row is left out.
pub fn confusion_pairs<'a>(matrices: impl IntoIterator<Item = &'a ConfusionMatrix>) -> Vec<ConfusionPair> {
    let mut sums: BTreeMap<(GoldLabel, GoldLabel), u64> = BTreeMap::new();
    for m in matrices {
        for &g in m.gold.iter().filter(|&&g| g != GoldLabel::CodeSwitch) {
            for &p in m.predicted.iter().filter(|&&p| p != g) {
                let c = m.count(g, p);
                if c > 0 {
                    *sums.entry((g, p)).or_default() += c;
                }
            }
        }
    }
    let mut pairs: Vec<ConfusionPair> = sums
        .into_iter()
        .map(|((gold, predicted), count)| ConfusionPair { gold, predicted, count })
        .collect();
    pairs.sort_by(|a, b| b.count.cmp(&a.count).then((a.gold, a.predicted).cmp(&(b.gold, b.predicted))));
    pairs
}
