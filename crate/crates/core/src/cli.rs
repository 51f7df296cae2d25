//! Command-line front end. The `borrowbench` binary is a thin wrapper
//! around [`Cli`] and [`run`].

use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::bench::{self, load_function_words, Benchmark, BuildConfig, FilterConfig};
use crate::config::{BackendKind, RunConfig};
use crate::error::{Error, Result};
use crate::label::{GoldLabel, Task};
use crate::lexicon::Lexicon;
use crate::lkg::{ingest_files, validate, LkgGraph};
use crate::parse::{parse_rate, NormalizationTable};
use crate::prompt::{builtin_demos, check_disjoint, render, StrategyRegistry};
use crate::retrieval::{ablate, linearize, retrieve, Ablation, RetrievalConfig, DEFAULT_MAX_LINES};
use crate::runner::{self, gold_oracle_script, load_records, reparse_file, RunContext, RunOptions};
use crate::scoring::{points, score_run, CellReport, ScoreRunOptions};

#[derive(Debug, Parser)]
#[command(name = "borrowbench", version, about = "Benchmark, prompt and score LLMs on Luxembourgish borrowing")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Filter a labeled corpus and sample the balanced benchmark.
    BuildBench(BuildBenchArgs),
    /// Build the knowledge graph from pattern, lexicon and synonym files.
    IngestKg(IngestKgArgs),
    /// Print the linearized evidence block for one token.
    RenderContext(RenderContextArgs),
    /// Print the system and user messages for one instance.
    Render(RenderArgs),
    /// Run the model × strategy × task grid, resuming where it stopped.
    Run(RunArgs),
    /// Report the parse-error rate of a prediction file, or re-parse it.
    Parse(ParseArgs),
    /// Score a run directory and write reports and CSV series.
    Score(ScoreArgs),
    /// Print a Markdown summary of scored reports.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct BuildBenchArgs {
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub per_class: usize,
    #[arg(long, default_value_t = 50)]
    pub diagnostic: usize,
    #[arg(long, default_value_t = bench::DEFAULT_MIN_CONFIDENCE)]
    pub min_confidence: f64,
    #[arg(long, default_value_t = bench::DEFAULT_MIN_CLASS_COUNT)]
    pub min_class_count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    #[arg(long)]
    pub function_words: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IngestKgArgs {
    #[arg(long)]
    pub patterns: PathBuf,
    #[arg(long)]
    pub lexicon: PathBuf,
    #[arg(long)]
    pub synonyms: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RenderContextArgs {
    #[arg(long)]
    pub graph: PathBuf,
    #[arg(long)]
    pub token: String,
    #[arg(long)]
    pub lemma: Option<String>,
    #[arg(long)]
    pub ablate: Option<Ablation>,
    #[arg(long, default_value_t = DEFAULT_MAX_LINES)]
    pub max_lines: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub bench: PathBuf,
    #[arg(long)]
    pub id: String,
    #[arg(long)]
    pub strategy: String,
    #[arg(long)]
    pub task: Task,
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Config whose extra strategies should be available.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Defaults to `paths.bench` from the config.
    #[arg(long)]
    pub bench: Option<PathBuf>,
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// `model=…,strategy=…,task=…` terms; repeat to OR several filters.
    #[arg(long)]
    pub cells: Vec<String>,
    /// Stop after this many new records.
    #[arg(long)]
    pub limit: Option<usize>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Re-request instances whose earlier attempt failed in transport.
    #[arg(long)]
    pub retry_failed: bool,
}

#[derive(Debug, Args)]
pub struct ParseArgs {
    #[arg(long = "in")]
    pub input: PathBuf,
    /// Rewrite parsed labels in place.
    #[arg(long)]
    pub rewrite: bool,
    /// Extra `alias<TAB>canonical` table.
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[arg(long)]
    pub bench: PathBuf,
    #[arg(long)]
    pub run: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "zero_shot")]
    pub zero_shot: String,
    #[arg(long, default_value = "kg_graph")]
    pub kg_graph: String,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory written by `score`.
    #[arg(long)]
    pub reports: PathBuf,
}

/// Execute one command. `Ok(false)` means the command finished but left
/// work undone.
pub fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::BuildBench(a) => build_bench(a).map(|_| true),
        Command::IngestKg(a) => ingest_kg(a).map(|_| true),
        Command::RenderContext(a) => render_context(a).map(|_| true),
        Command::Render(a) => render_one(a).map(|_| true),
        Command::Run(a) => run_grid(a),
        Command::Parse(a) => parse_cmd(a).map(|_| true),
        Command::Score(a) => score_cmd(a).map(|_| true),
        Command::Report(a) => report(a).map(|_| true),
    }
}

/// Parse `args`, run, and map the outcome to an exit code.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn build_bench(a: BuildBenchArgs) -> Result<()> {
    let function_words = match &a.function_words {
        Some(p) => load_function_words(p)?,
        None => HashSet::new(),
    };
    let lexicon = a.lexicon.as_deref().map(Lexicon::load).transpose()?;
    let cfg = BuildConfig {
        filter: FilterConfig {
            min_confidence: a.min_confidence,
            function_words,
        },
        min_class_count: a.min_class_count,
        per_class: a.per_class,
        diagnostic_count: a.diagnostic,
        seed: a.seed,
    };
    let file = File::open(&a.corpus).map_err(|e| Error::io(&a.corpus, e))?;
    let outcome = bench::build(BufReader::new(file), &cfg, lexicon.as_ref())?;
    check_disjoint(&builtin_demos(), &outcome.instances)?;
    bench::save_benchmark(&outcome.instances, &a.out)?;
    eprintln!(
        "{} instances written to {} ({} corpus lines rejected, {} in lexicon subset)",
        outcome.instances.len(),
        a.out.display(),
        outcome.rejected.len(),
        outcome.lexicon_flagged
    );
    for (label, n) in &outcome.pool_counts {
        let status = if *label == GoldLabel::CodeSwitch {
            "diagnostic"
        } else if outcome.active.contains(label) {
            "active"
        } else {
            "below threshold"
        };
        eprintln!("  {label}: {n} in pool ({status})");
    }
    Ok(())
}

fn ingest_kg(a: IngestKgArgs) -> Result<()> {
    let (graph, report) = ingest_files(&a.patterns, &a.lexicon, &a.synonyms)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    let violations = validate(&graph);
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("{}: {:?}: {}", v.subject, v.rule, v.message);
        }
        return Err(Error::InvalidArgument(format!("{} graph violation(s)", violations.len())));
    }
    graph.save(&a.out)?;
    eprintln!(
        "graph with {} nodes and {} edges written to {}",
        graph.node_count(),
        graph.edge_count(),
        a.out.display()
    );
    Ok(())
}

fn render_context(a: RenderContextArgs) -> Result<()> {
    let graph = LkgGraph::load(&a.graph)?;
    let sub = retrieve(&graph, &a.token, a.lemma.as_deref(), a.seed, &RetrievalConfig::default());
    let sub = match a.ablate {
        Some(v) => ablate(&sub, v),
        None => sub,
    };
    println!("{}", linearize(&sub, a.max_lines));
    Ok(())
}

fn registry_from(config: Option<&Path>) -> Result<StrategyRegistry> {
    match config {
        Some(p) => RunConfig::load(p)?.registry(),
        None => Ok(StrategyRegistry::default()),
    }
}

fn render_one(a: RenderArgs) -> Result<()> {
    let bench = Benchmark::load(&a.bench)?;
    let instance = bench.get(&a.id).ok_or_else(|| Error::UnknownInstance(a.id.clone()))?;
    let registry = registry_from(a.config.as_deref())?;
    let strategy = registry.get(&a.strategy)?;
    let graph = a.graph.as_deref().map(LkgGraph::load).transpose()?;
    let prompt = render(instance, strategy, a.task, graph.as_ref(), &builtin_demos())?;
    let mut out = io::stdout().lock();
    writeln!(out, "=== system ===\n{}\n=== user ===\n{}", prompt.system, prompt.user)
        .map_err(|e| Error::io("<stdout>", e))?;
    eprintln!("fingerprint {}", prompt.fingerprint);
    Ok(())
}

fn run_grid(a: RunArgs) -> Result<bool> {
    let cfg = RunConfig::load(&a.config)?;
    let pick = |flag: Option<PathBuf>, from_cfg: &Option<PathBuf>, what: &str| {
        flag.or_else(|| from_cfg.clone())
            .ok_or_else(|| Error::Config(format!("no {what} given on the command line or in the config")))
    };
    let bench_path = pick(a.bench, &cfg.paths.bench, "benchmark")?;
    let out = pick(a.out, &cfg.paths.out, "output directory")?;
    let graph_path = a.graph.or_else(|| cfg.paths.graph.clone());

    let bench = Benchmark::load(&bench_path)?;
    let registry = cfg.registry()?;
    let graph = graph_path.as_deref().map(LkgGraph::load).transpose()?;
    let demos = builtin_demos();
    check_disjoint(&demos, bench.instances())?;
    let table = cfg.normalization_table()?;

    let mut cells = cfg.cells();
    if !a.cells.is_empty() {
        let mut kept = Vec::new();
        for c in cells {
            let mut keep = false;
            for f in &a.cells {
                keep |= c.matches_filter(f)?;
            }
            if keep {
                kept.push(c);
            }
        }
        cells = kept;
    }
    if cells.is_empty() {
        return Err(Error::Config("no cells selected".into()));
    }

    let probe_gateway;
    let script = if cfg.gateway.backend == BackendKind::GoldOracle {
        probe_gateway = cfg.gateway(Some(Default::default()))?;
        let probe = RunContext {
            bench: &bench,
            registry: &registry,
            graph: graph.as_ref(),
            demos: &demos,
            models: &cfg.models,
            gateway: &probe_gateway,
            table: &table,
        };
        Some(gold_oracle_script(&probe, &cells)?)
    } else {
        None
    };
    let gateway = cfg.gateway(script)?;
    let ctx = RunContext {
        bench: &bench,
        registry: &registry,
        graph: graph.as_ref(),
        demos: &demos,
        models: &cfg.models,
        gateway: &gateway,
        table: &table,
    };
    let opts = RunOptions {
        workers: a.workers.unwrap_or(cfg.run.workers),
        limit: a.limit,
        retry_failed: a.retry_failed,
        ..Default::default()
    };
    let summary = runner::run(&ctx, &cells, &out, &opts)?;
    eprintln!("{:<60} {:>6} {:>7} {:>6} {:>6} {:>9}", "cell", "done", "skipped", "failed", "parse", "remaining");
    for c in &summary.cells {
        eprintln!(
            "{:<60} {:>6} {:>7} {:>6} {:>6} {:>9}",
            c.cell.to_string(),
            c.done,
            c.skipped,
            c.failed,
            c.parse_errors,
            c.remaining
        );
    }
    eprintln!("{} request(s) sent", gateway.request_count());
    Ok(summary.is_complete())
}

fn parse_cmd(a: ParseArgs) -> Result<()> {
    let table = match &a.table {
        Some(p) => NormalizationTable::load_extended(p)?,
        None => NormalizationTable::default(),
    };
    if a.rewrite {
        let changed = reparse_file(&a.input, &table)?;
        eprintln!("{changed} label(s) changed in {}", a.input.display());
    }
    let records = load_records(&a.input)?;
    let rate = parse_rate(records.iter().map(|r| &r.parsed_label))?;
    println!("{}\t{}\t{}", a.input.display(), records.len(), rate);
    Ok(())
}

fn score_cmd(a: ScoreArgs) -> Result<()> {
    let bench = Benchmark::load(&a.bench)?;
    let opts = ScoreRunOptions {
        zero_shot: a.zero_shot,
        kg_graph: a.kg_graph,
    };
    let reports = score_run(&bench, &a.run, &a.out, &opts)?;
    eprintln!("{} cell report(s) written to {}", reports.len(), a.out.display());
    Ok(())
}

fn load_reports(dir: &Path) -> Result<Vec<CellReport>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    paths
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            Ok(serde_json::from_str(&text)?)
        })
        .collect()
}

/// Markdown table of per-cell headline numbers.
pub fn report_table(reports: &[CellReport]) -> String {
    let pct = |v: Option<f64>| v.map_or("n/a".to_string(), |x| format!("{:.1}", points(x)));
    let mut out = String::from(
        "| model | strategy | task | acc | bal. acc | macro F1 | F1 (YES) | parse err | ΔKG |\n|---|---|---|---|---|---|---|---|---|\n",
    );
    for r in reports {
        let c = r.report.classification.as_ref();
        out.push_str(&format!(
            "| {} | {} | {} | {} | {} | {} | {} | {} | {} |\n",
            r.cell.model_id,
            r.cell.strategy,
            r.cell.task,
            pct(Some(r.report.accuracy)),
            pct(c.map(|c| c.balanced_accuracy)),
            c.map_or("n/a".into(), |c| format!("{:.3}", c.macro_f1)),
            r.report.neology.as_ref().map_or("n/a".into(), |n| format!("{:.3}", n.f1)),
            pct(Some(r.report.parse_error_rate)),
            r.report.delta_kg.map_or("".into(), |d| format!("{d:+.1}")),
        ));
    }
    out
}

fn report(a: ReportArgs) -> Result<()> {
    let reports = load_reports(&a.reports)?;
    if reports.is_empty() {
        return Err(Error::Empty(format!("no reports in {}", a.reports.display())));
    }
    let mut out = BufWriter::new(io::stdout().lock());
    out.write_all(report_table(&reports).as_bytes())
        .and_then(|_| out.flush())
        .map_err(|e| Error::io("<stdout>", e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn clap_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        assert_eq!(main_with(["borrowbench", "score", "--bogus"]), ExitCode::from(2));
        assert_eq!(main_with(["borrowbench", "frobnicate"]), ExitCode::from(2));
    }

    #[test]
    fn all_subcommands_exist() {
        let cmd = Cli::command();
        let names: Vec<_> = cmd.get_subcommands().map(|s| s.get_name().to_string()).collect();
        for n in ["build-bench", "ingest-kg", "render-context", "render", "run", "parse", "score", "report"] {
            assert!(names.contains(&n.to_string()), "{n}");
        }
    }
}
