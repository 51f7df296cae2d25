//! Resumable execution of the model × strategy × task grid.
//!
//! Each cell writes one append-only JSONL file. On start, keys already on
//! disk are skipped, so an interrupted run continues where it stopped.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{mpsc, Arc};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::bench::{Benchmark, BenchmarkInstance};
use crate::error::{Error, Result};
use crate::gateway::{CompletionStatus, Gateway, ModelSpec};
use crate::label::{Answer, GoldLabel, Task};
use crate::lkg::LkgGraph;
use crate::parse::{parse, NormalizationTable};
use crate::prompt::{render, Demo, RenderedPrompt, StrategyRegistry};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RunCell {
    pub model_id: String,
    pub strategy: String,
    pub task: Task,
}

impl RunCell {
    pub fn new(model_id: impl Into<String>, strategy: impl Into<String>, task: Task) -> Self {
        RunCell {
            model_id: model_id.into(),
            strategy: strategy.into(),
            task,
        }
    }

    /// `<model>__<strategy>__<task>.jsonl`, with the model id made
    /// filesystem-safe.
    pub fn file_name(&self) -> String {
        format!("{}__{}__{}.jsonl", sanitize(&self.model_id), self.strategy, self.task)
    }

    /// Whether an instance belongs to this cell.
    pub fn includes(&self, instance: &BenchmarkInstance) -> bool {
        self.task == Task::Classify || instance.gold != GoldLabel::CodeSwitch
    }

    /// Match a `--cells` filter of comma-separated `model=`, `strategy=`
    /// and `task=` terms; every term must match.
    pub fn matches_filter(&self, filter: &str) -> Result<bool> {
        for term in filter.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (key, value) = term
                .split_once('=')
                .ok_or_else(|| Error::InvalidArgument(format!("cell filter term `{term}` is not key=value")))?;
            let field = match key.trim() {
                "model" => self.model_id.as_str(),
                "strategy" => self.strategy.as_str(),
                "task" => self.task.as_str(),
                other => {
                    return Err(Error::UnknownValue {
                        what: "cell filter key",
                        value: other.to_string(),
                    })
                }
            };
            if field != value.trim() {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl fmt::Display for RunCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.model_id, self.strategy, self.task)
    }
}

fn sanitize(model_id: &str) -> String {
    model_id
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' { c } else { '-' })
        .collect()
}

/// Every combination, in model, task, strategy order.
pub fn grid(models: &[ModelSpec], strategies: &BTreeMap<Task, Vec<String>>) -> Vec<RunCell> {
    let mut cells = Vec::new();
    for m in models {
        for (task, names) in strategies {
            for s in names {
                cells.push(RunCell::new(&m.model_id, s, *task));
            }
        }
    }
    cells
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub instance_id: String,
    pub model_id: String,
    pub strategy: String,
    pub task: Task,
    pub raw_response: String,
    pub parsed_label: Answer,
    pub status: CompletionStatus,
    pub prompt_fingerprint: String,
    pub created_at: DateTime<Utc>,
    pub attempt_count: u32,
}

impl PredictionRecord {
    pub fn cell(&self) -> RunCell {
        RunCell::new(&self.model_id, &self.strategy, self.task)
    }

    pub fn key(&self) -> (&str, &str, &str, Task) {
        (&self.instance_id, &self.model_id, &self.strategy, self.task)
    }
}

pub type Clock = Arc<dyn Fn() -> DateTime<Utc> + Send + Sync>;

#[derive(Clone)]
pub struct RunOptions {
    /// Worker threads per cell.
    pub workers: usize,
    /// Stop after this many new records in total (for staged runs).
    pub limit: Option<usize>,
    /// Drop earlier non-OK records and request them again.
    pub retry_failed: bool,
    pub clock: Clock,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            workers: 4,
            limit: None,
            retry_failed: false,
            clock: Arc::new(Utc::now),
        }
    }
}

impl fmt::Debug for RunOptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RunOptions")
            .field("workers", &self.workers)
            .field("limit", &self.limit)
            .field("retry_failed", &self.retry_failed)
            .finish_non_exhaustive()
    }
}

/// Shared read-only inputs of a run.
pub struct RunContext<'a> {
    pub bench: &'a Benchmark,
    pub registry: &'a StrategyRegistry,
    pub graph: Option<&'a LkgGraph>,
    pub demos: &'a [Demo],
    pub models: &'a [ModelSpec],
    pub gateway: &'a Gateway,
    pub table: &'a NormalizationTable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CellSummary {
    pub cell: RunCell,
    pub done: usize,
    pub skipped: usize,
    pub failed: usize,
    pub parse_errors: usize,
    pub remaining: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RunSummary {
    pub cells: Vec<CellSummary>,
}

impl RunSummary {
    pub fn is_complete(&self) -> bool {
        self.cells.iter().all(|c| c.remaining == 0)
    }

    pub fn requests_made(&self) -> usize {
        self.cells.iter().map(|c| c.done).sum()
    }
}

/// Drop a trailing line without newline, left by a crash mid-write.
fn repair_tail(path: &Path) -> Result<()> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if bytes.is_empty() || bytes.ends_with(b"\n") {
        return Ok(());
    }
    let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
    log::warn!(
        "{}: truncating {} byte(s) of incomplete trailing record",
        path.display(),
        bytes.len() - keep
    );
    let file = OpenOptions::new().write(true).open(path).map_err(|e| Error::io(path, e))?;
    file.set_len(keep as u64).map_err(|e| Error::io(path, e))
}

/// All records of one prediction file, in file order.
pub fn load_records(path: &Path) -> Result<Vec<PredictionRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path.display().to_string();
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| Error::schema(&name, i + 1, e.to_string()))?;
        out.push(rec);
    }
    Ok(out)
}

fn write_records_atomic(path: &Path, records: &[PredictionRecord]) -> Result<()> {
    let tmp = path.with_extension("jsonl.tmp");
    {
        let file = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        let mut w = BufWriter::new(file);
        for r in records {
            serde_json::to_writer(&mut w, r)?;
            w.write_all(b"\n").map_err(|e| Error::io(&tmp, e))?;
        }
        w.flush().map_err(|e| Error::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Records grouped by cell, from every `*.jsonl` file in `dir`.
pub fn load_run(dir: &Path) -> Result<BTreeMap<RunCell, Vec<PredictionRecord>>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    paths.sort();
    let mut cells: BTreeMap<RunCell, Vec<PredictionRecord>> = BTreeMap::new();
    for p in paths {
        for r in load_records(&p)? {
            cells.entry(r.cell()).or_default().push(r);
        }
    }
    Ok(cells)
}

/// Re-derive `parsed_label` for every answered record. Returns the number
/// of records whose label changed.
pub fn reparse_file(path: &Path, table: &NormalizationTable) -> Result<usize> {
    let mut records = load_records(path)?;
    let mut changed = 0;
    for r in &mut records {
        if r.status != CompletionStatus::Ok {
            continue;
        }
        let label = parse(&r.raw_response, r.task, table);
        if label != r.parsed_label {
            r.parsed_label = label;
            changed += 1;
        }
    }
    write_records_atomic(path, &records)?;
    Ok(changed)
}

fn existing_keys(path: &Path, cell: &RunCell, retry_failed: bool) -> Result<HashSet<String>> {
    if !path.exists() {
        return Ok(HashSet::new());
    }
    repair_tail(path)?;
    let records = load_records(path)?;
    let name = path.display().to_string();
    let mut keys = HashSet::new();
    let mut kept = Vec::with_capacity(records.len());
    for (i, r) in records.into_iter().enumerate() {
        if r.cell() != *cell {
            return Err(Error::schema(&name, i + 1, format!("record belongs to cell {}", r.cell())));
        }
        if retry_failed && r.status != CompletionStatus::Ok {
            continue;
        }
        if !keys.insert(r.instance_id.clone()) {
            log::warn!("{name}: duplicate record for instance {}", r.instance_id);
            continue;
        }
        kept.push(r);
    }
    if retry_failed {
        write_records_atomic(path, &kept)?;
    }
    Ok(keys)
}

/// Prompt of `instance` under `cell`'s strategy and task.
pub fn render_for(ctx: &RunContext<'_>, instance: &BenchmarkInstance, cell: &RunCell) -> Result<RenderedPrompt> {
    let strategy = ctx.registry.get(&cell.strategy)?;
    render(instance, strategy, cell.task, ctx.graph, ctx.demos)
}

/// Run every cell, appending to `<out>/<cell file>`.
pub fn run(ctx: &RunContext<'_>, cells: &[RunCell], out: &Path, opts: &RunOptions) -> Result<RunSummary> {
    let mut files: HashMap<String, &RunCell> = HashMap::new();
    for cell in cells {
        if let Some(other) = files.insert(cell.file_name(), cell) {
            if other != cell {
                return Err(Error::InvalidArgument(format!(
                    "cells {other} and {cell} would share the file {}",
                    cell.file_name()
                )));
            }
        }
    }
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let mut budget = opts.limit.unwrap_or(usize::MAX);
    let mut summary = RunSummary::default();
    for cell in cells {
        let spec = ctx
            .models
            .iter()
            .find(|m| m.model_id == cell.model_id)
            .ok_or_else(|| Error::UnknownValue {
                what: "model",
                value: cell.model_id.clone(),
            })?;
        let strategy = ctx.registry.get(&cell.strategy)?;
        if strategy.needs_graph() && ctx.graph.is_none() {
            return Err(Error::MissingGraph(strategy.name.clone()));
        }
        let path = out.join(cell.file_name());
        let existing = existing_keys(&path, cell, opts.retry_failed)?;
        let members: Vec<&BenchmarkInstance> = ctx.bench.instances().iter().filter(|i| cell.includes(i)).collect();
        let pending: Vec<&BenchmarkInstance> = members.iter().copied().filter(|i| !existing.contains(&i.id)).collect();
        let skipped = members.len() - pending.len();
        let take = pending.len().min(budget);
        budget -= take;
        let batch = &pending[..take];
        let prompts = batch
            .iter()
            .map(|i| render(i, strategy, cell.task, ctx.graph, ctx.demos))
            .collect::<Result<Vec<_>>>()?;

        let mut cs = CellSummary {
            cell: cell.clone(),
            done: 0,
            skipped,
            failed: 0,
            parse_errors: 0,
            remaining: pending.len(),
        };
        if !batch.is_empty() {
            log::info!("{cell}: {} to run, {skipped} already done", batch.len());
            let file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(&path)
                .map_err(|e| Error::io(&path, e))?;
            let mut writer = BufWriter::new(file);
            let next = AtomicUsize::new(0);
            let (tx, rx) = mpsc::channel::<PredictionRecord>();
            let workers = opts.workers.clamp(1, batch.len());
            std::thread::scope(|s| -> Result<()> {
                for _ in 0..workers {
                    let tx = tx.clone();
                    let (next, prompts) = (&next, &prompts);
                    s.spawn(move || loop {
                        let i = next.fetch_add(1, Ordering::Relaxed);
                        let Some(prompt) = prompts.get(i) else { break };
                        let result = ctx.gateway.complete(prompt, spec);
                        let parsed_label = if result.status == CompletionStatus::Ok {
                            parse(&result.raw_text, cell.task, ctx.table)
                        } else {
                            Answer::NoResponse
                        };
                        let record = PredictionRecord {
                            instance_id: batch[i].id.clone(),
                            model_id: cell.model_id.clone(),
                            strategy: cell.strategy.clone(),
                            task: cell.task,
                            raw_response: result.raw_text,
                            parsed_label,
                            status: result.status,
                            prompt_fingerprint: prompt.fingerprint.clone(),
                            created_at: (opts.clock)(),
                            attempt_count: result.attempt_count,
                        };
                        if tx.send(record).is_err() {
                            break;
                        }
                    });
                }
                drop(tx);
                for record in rx {
                    let mut line = serde_json::to_string(&record)?;
                    line.push('\n');
                    writer.write_all(line.as_bytes()).map_err(|e| Error::io(&path, e))?;
                    writer.flush().map_err(|e| Error::io(&path, e))?;
                    cs.done += 1;
                    cs.remaining -= 1;
                    cs.failed += usize::from(record.status != CompletionStatus::Ok);
                    cs.parse_errors += usize::from(record.parsed_label == Answer::ParseError);
                }
                Ok(())
            })?;
        }
        if cs.remaining > 0 {
            log::warn!("{cell}: {} instance(s) not yet recorded", cs.remaining);
        }
        summary.cells.push(cs);
    }
    Ok(summary)
}

/// Oracle answer for CODE_SWITCH items, which have no label of their own in
/// the answer space. They never enter headline metrics.
pub const ORACLE_CODE_SWITCH_ANSWER: GoldLabel = GoldLabel::EnLoan;

/// Script mapping each prompt fingerprint to the gold answer, for a mock
/// backend that is always right.
pub fn gold_oracle_script(ctx: &RunContext<'_>, cells: &[RunCell]) -> Result<HashMap<String, String>> {
    let mut script = HashMap::new();
    let mut seen = HashSet::new();
    for cell in cells {
        if !seen.insert((cell.strategy.clone(), cell.task)) {
            continue;
        }
        for inst in ctx.bench.instances().iter().filter(|i| cell.includes(i)) {
            let prompt = render_for(ctx, inst, cell)?;
            let answer = match cell.task {
                Task::Classify if inst.gold == GoldLabel::CodeSwitch => ORACLE_CODE_SWITCH_ANSWER.as_str(),
                Task::Classify => inst.gold.as_str(),
                Task::Neology => inst.neology_gold.as_str(),
            };
            script.insert(prompt.fingerprint, answer.to_string());
        }
    }
    Ok(script)
}
