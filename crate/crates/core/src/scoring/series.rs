//! Scoring a whole run directory and writing the aggregate CSV series.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{confusion_pairs, points, score, ConfusionPair, ScoreReport};
use crate::bench::Benchmark;
use crate::error::{Error, Result};
use crate::label::{GoldLabel, Task};
use crate::runner::{load_run, RunCell};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellReport {
    pub cell: RunCell,
    pub report: ScoreReport,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreRunOptions {
    /// Baseline strategy for the knowledge-graph gain.
    pub zero_shot: String,
    pub kg_graph: String,
}

impl Default for ScoreRunOptions {
    fn default() -> Self {
        ScoreRunOptions {
            zero_shot: "zero_shot".into(),
            kg_graph: "kg_graph".into(),
        }
    }
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

fn finish(mut w: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn opt_points(v: Option<f64>) -> Option<f64> {
    v.map(points)
}

/// Score every cell under `run_dir`, write `<cell>.json` reports and the
/// CSV series into `out_dir`.
pub fn score_run(bench: &Benchmark, run_dir: &Path, out_dir: &Path, opts: &ScoreRunOptions) -> Result<Vec<CellReport>> {
    let cells = load_run(run_dir)?;
    if cells.is_empty() {
        return Err(Error::Empty(format!("no prediction files in {}", run_dir.display())));
    }
    let mut reports = Vec::new();
    for (cell, records) in cells {
        match score(bench, &records, cell.task) {
            Ok(report) => reports.push(CellReport { cell, report }),
            Err(Error::NoValidRecords) => log::warn!("{cell}: no valid records, not scored"),
            Err(e) => return Err(e),
        }
    }
    let baselines: BTreeMap<(String, Task), f64> = reports
        .iter()
        .filter(|r| r.cell.strategy == opts.zero_shot)
        .map(|r| ((r.cell.model_id.clone(), r.cell.task), r.report.accuracy))
        .collect();
    for r in reports.iter_mut().filter(|r| r.cell.strategy == opts.kg_graph) {
        if let Some(zero) = baselines.get(&(r.cell.model_id.clone(), r.cell.task)) {
            r.report.delta_kg = Some((r.report.accuracy - zero) * 100.0);
        }
    }

    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    for r in &reports {
        let name = r.cell.file_name().replace(".jsonl", ".json");
        let path = out_dir.join(name);
        let mut text = serde_json::to_string_pretty(r)?;
        text.push('\n');
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    write_summary(&out_dir.join("summary.csv"), &reports)?;
    write_per_class_f1(&out_dir.join("per_class_f1.csv"), &reports)?;
    let pairs = aggregate_confusion_pairs(&reports);
    write_confusion_pairs(&out_dir.join("confusion_pairs.csv"), &pairs)?;
    write_native_fp_rates(&out_dir.join("native_fp_rates.csv"), &reports)?;
    write_strategy_grid(&out_dir.join("ablation_grid.csv"), &reports)?;
    write_delta_kg(&out_dir.join("delta_kg.csv"), &reports, opts)?;
    write_en_distractor(&out_dir.join("en_distractor.csv"), &reports)?;
    Ok(reports)
}

/// Confusion pairs summed over every classification cell.
pub fn aggregate_confusion_pairs(reports: &[CellReport]) -> Vec<ConfusionPair> {
    confusion_pairs(
        reports
            .iter()
            .filter_map(|r| r.report.classification.as_ref().map(|c| &c.confusion)),
    )
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    model: &'a str,
    strategy: &'a str,
    task: Task,
    records: usize,
    valid: usize,
    accuracy_pct: f64,
    balanced_accuracy_pct: Option<f64>,
    macro_f1: Option<f64>,
    weighted_f1: Option<f64>,
    f1_neo: Option<f64>,
    parse_errors: usize,
    no_response: usize,
    parse_error_rate_pct: f64,
    delta_kg: Option<f64>,
}

pub fn write_summary(path: &Path, reports: &[CellReport]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for r in reports {
        let c = r.report.classification.as_ref();
        w.serialize(SummaryRow {
            model: &r.cell.model_id,
            strategy: &r.cell.strategy,
            task: r.cell.task,
            records: r.report.records,
            valid: r.report.valid,
            accuracy_pct: points(r.report.accuracy),
            balanced_accuracy_pct: c.map(|c| points(c.balanced_accuracy)),
            macro_f1: c.map(|c| c.macro_f1),
            weighted_f1: c.map(|c| c.weighted_f1),
            f1_neo: r.report.neology.as_ref().map(|n| n.f1),
            parse_errors: r.report.parse_errors,
            no_response: r.report.no_response,
            parse_error_rate_pct: points(r.report.parse_error_rate),
            delta_kg: r.report.delta_kg.map(|d| (d * 10.0).round() / 10.0),
        })?;
    }
    finish(w, path)
}

#[derive(Serialize)]
struct PerClassRow<'a> {
    model: &'a str,
    strategy: &'a str,
    class: GoldLabel,
    precision: f64,
    recall: f64,
    f1: f64,
    support: usize,
}

pub fn write_per_class_f1(path: &Path, reports: &[CellReport]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for r in reports {
        let Some(c) = &r.report.classification else { continue };
        for (class, m) in &c.per_class {
            w.serialize(PerClassRow {
                model: &r.cell.model_id,
                strategy: &r.cell.strategy,
                class: *class,
                precision: m.precision,
                recall: m.recall,
                f1: m.f1,
                support: m.support,
            })?;
        }
    }
    finish(w, path)
}

#[derive(Serialize)]
struct PairRow {
    rank: usize,
    gold: GoldLabel,
    predicted: GoldLabel,
    count: u64,
}

fn write_confusion_pairs(path: &Path, pairs: &[ConfusionPair]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for (i, p) in pairs.iter().enumerate() {
        w.serialize(PairRow {
            rank: i + 1,
            gold: p.gold,
            predicted: p.predicted,
            count: p.count,
        })?;
    }
    finish(w, path)
}

#[derive(Serialize)]
struct NativeFpRow<'a> {
    model: &'a str,
    strategy: &'a str,
    native_support: usize,
    false_positive_rate_pct: Option<f64>,
}

pub fn write_native_fp_rates(path: &Path, reports: &[CellReport]) -> Result<()> {
    let mut w = csv_writer(path)?;
    for r in reports {
        let Some(c) = &r.report.classification else { continue };
        w.serialize(NativeFpRow {
            model: &r.cell.model_id,
            strategy: &r.cell.strategy,
            native_support: c.per_class.get(&GoldLabel::Native).map_or(0, |m| m.support),
            false_positive_rate_pct: opt_points(c.native_false_positive_rate),
        })?;
    }
    finish(w, path)
}

/// Accuracy for every (model, strategy, task), one row each; the ablation
/// grid is the subset with ablated strategies.
pub fn write_strategy_grid(path: &Path, reports: &[CellReport]) -> Result<()> {
    #[derive(Serialize)]
    struct Row<'a> {
        model: &'a str,
        strategy: &'a str,
        task: Task,
        accuracy_pct: f64,
    }
    let mut w = csv_writer(path)?;
    for r in reports {
        w.serialize(Row {
            model: &r.cell.model_id,
            strategy: &r.cell.strategy,
            task: r.cell.task,
            accuracy_pct: points(r.report.accuracy),
        })?;
    }
    finish(w, path)
}

pub fn write_delta_kg(path: &Path, reports: &[CellReport], opts: &ScoreRunOptions) -> Result<()> {
    #[derive(Serialize)]
    struct Row<'a> {
        model: &'a str,
        task: Task,
        zero_shot_pct: f64,
        kg_graph_pct: f64,
        delta_kg: f64,
    }
    let find = |model: &str, task: Task, strategy: &str| {
        reports
            .iter()
            .find(|r| r.cell.model_id == model && r.cell.task == task && r.cell.strategy == strategy)
    };
    let mut w = csv_writer(path)?;
    for kg in reports.iter().filter(|r| r.cell.strategy == opts.kg_graph) {
        let Some(zero) = find(&kg.cell.model_id, kg.cell.task, &opts.zero_shot) else { continue };
        let delta = (kg.report.accuracy - zero.report.accuracy) * 100.0;
        w.serialize(Row {
            model: &kg.cell.model_id,
            task: kg.cell.task,
            zero_shot_pct: points(zero.report.accuracy),
            kg_graph_pct: points(kg.report.accuracy),
            delta_kg: (delta * 10.0).round() / 10.0,
        })?;
    }
    finish(w, path)
}

pub fn write_en_distractor(path: &Path, reports: &[CellReport]) -> Result<()> {
    #[derive(Serialize)]
    struct Row<'a> {
        model: &'a str,
        strategy: &'a str,
        en_pred: usize,
        to_nat: usize,
        to_fr: usize,
        to_de: usize,
        other: usize,
        valid: usize,
        rate_pct: f64,
    }
    let mut w = csv_writer(path)?;
    for r in reports {
        let Some(c) = &r.report.classification else { continue };
        let d = &c.en_distractor;
        w.serialize(Row {
            model: &r.cell.model_id,
            strategy: &r.cell.strategy,
            en_pred: d.en_pred,
            to_nat: d.to_nat,
            to_fr: d.to_fr,
            to_de: d.to_de,
            other: d.other,
            valid: d.valid,
            rate_pct: points(d.rate()),
        })?;
    }
    finish(w, path)
}
