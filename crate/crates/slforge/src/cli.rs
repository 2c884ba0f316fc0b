//! Subcommands of the `slforge` binary. Every stage reads and writes files
//! under the work directory and reports a JSON summary.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use slforge_core::analysis::compute_corpus_stats;
use slforge_core::preprocess::{
    detect_anonymization_markers, prune_unused_select_vars, strip_label_service, AnonymizationMarkers, Deduplicator,
};
use slforge_core::split::dedup_one_per_cluster;
use slforge_core::sparql::{parse_query_with, serialize_query, PrefixTable};

use crate::agent::{
    run_s2q, AgentOutcome, BackendError, ChatBackend, ModelTurn, OpenAiBackend, RunLimits, ScriptedBackend, SparqlSearch,
    ToolContext, TranscriptRecord,
};
use crate::config::{ConfigError, PipelineConfig};
use crate::curate::{export_kgqa, export_pairs, import_pairs, validate_pair, DatasetPair, Validation};
use crate::embed::{embed_pairs, EmbedError, Embedder, HashingEmbedder, HttpEmbedder};
use crate::kg::{build_agent_input, AgentInput, HttpEndpoint, KgError};
use crate::log::{ColumnMap, DecodeError, IngestCounts, LogEntry, LogReader};
use crate::records::{for_each_jsonl, open_input, read_jsonl, Appender, AtomicFile, RecordError};
use crate::split::{apply, cluster_and_split, write_coords};

#[derive(Debug, Parser)]
#[command(name = "slforge", version, about = "Turn anonymized SPARQL query logs into question-query datasets")]
pub struct Cli {
    /// Pipeline configuration (TOML). Defaults plus environment overrides when absent.
    #[arg(long, global = true, env = "SLF_CONFIG")]
    pub config: Option<PathBuf>,
    /// Directory for intermediate and output files, overriding the config.
    #[arg(long, global = true)]
    pub work_dir: Option<PathBuf>,
    /// Worker threads, overriding the config (0: one per CPU).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decode raw log files, keep one category and deduplicate.
    Ingest(IngestArgs),
    /// Query statistics of a dataset or query file.
    Stats(StatsArgs),
    /// Strip the label service, prune unused projections, detect anonymization.
    Preprocess(IoArgs),
    /// Build the enriched agent input of every preprocessed entry.
    Enrich(IoArgs),
    /// Run the agent over agent inputs not yet in the transcript store.
    Generate(GenerateArgs),
    /// Turn answered sessions into dataset pairs and validate them.
    Validate(ValidateArgs),
    /// Embed, cluster and split the valid pairs.
    Split(SplitArgs),
    /// Write the dataset and the per-split KGQA files.
    Export(ExportArgs),
    /// Write the 2-D coordinates file.
    Coords(IoArgs),
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Log files, optionally gzip-compressed.
    #[arg(long, required = true, num_args = 1..)]
    pub input: Vec<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Zero-based column of the percent-encoded query.
    #[arg(long, default_value_t = 0)]
    pub query_col: usize,
    #[arg(long, default_value_t = 1)]
    pub ts_col: usize,
    #[arg(long, default_value_t = 2)]
    pub category_col: usize,
    /// Keep only rows of this category; empty keeps all.
    #[arg(long, default_value = "organic")]
    pub category_filter: String,
    /// Interval label for all rows instead of deriving it from timestamps.
    #[arg(long)]
    pub interval: Option<String>,
    #[arg(long, default_value = "\t")]
    pub delimiter: char,
    /// Keep `+` literally instead of decoding it as a space.
    #[arg(long)]
    pub keep_plus: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QueryFormat {
    /// Pick by file extension.
    Auto,
    /// JSON objects per line with a `sparql`, `raw_query` or `query` field.
    Jsonl,
    /// Queries separated by `#---` lines, or one per line without separators.
    Text,
    /// Query in the first tab-separated column, header line skipped.
    Tsv,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = QueryFormat::Auto)]
    pub format: QueryFormat,
    /// Report file; printed with the summary when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IoArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Transcript store; sessions already in it are skipped.
    #[arg(long)]
    pub transcripts: Option<PathBuf>,
    /// Process at most this many new entries.
    #[arg(long)]
    pub limit: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub transcripts: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Records(#[from] RecordError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Endpoint(#[from] KgError),
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Embedding(#[from] EmbedError),
    #[error("{0}")]
    Split(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Records(RecordError::Schema { .. }) => "schema",
            CliError::Records(RecordError::Io { .. }) | CliError::Io { .. } => "io",
            CliError::Endpoint(_) => "endpoint",
            CliError::Backend(_) => "backend",
            CliError::Embedding(_) => "embedding",
            CliError::Split(_) => "split",
            CliError::Usage(_) => "usage",
        }
    }

    /// The machine-readable failure report printed by the binary.
    pub fn to_json(&self) -> Value {
        let mut e = json!({"kind": self.kind(), "message": self.to_string()});
        if let CliError::Records(r) = self {
            if let Some(line) = r.line() {
                e["line"] = json!(line);
            }
        }
        json!({"ok": false, "error": e})
    }
}

/// What a subcommand did. `failed` counts entries that could not be
/// processed for operational reasons and may succeed on a re-run.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: &'static str,
    pub summary: Value,
    pub failed: u64,
}

impl Report {
    pub fn to_json(&self) -> Value {
        json!({"ok": self.failed == 0, "command": self.command, "failed": self.failed, "summary": self.summary})
    }

    pub fn exit_code(&self) -> i32 {
        if self.failed == 0 {
            0
        } else {
            2
        }
    }
}

struct Env {
    cfg: PipelineConfig,
    table: PrefixTable,
    pool: rayon::ThreadPool,
}

impl Env {
    fn work(&self, name: &str) -> PathBuf {
        self.cfg.paths.work_dir.join(name)
    }

    fn endpoint(&self) -> Result<HttpEndpoint, CliError> {
        Ok(HttpEndpoint::new(&self.cfg.endpoint, self.table.clone())?)
    }
}

fn or_work(p: &Option<PathBuf>, env: &Env, default: &str) -> PathBuf {
    p.clone().unwrap_or_else(|| env.work(default))
}

pub const ENTRIES: &str = "entries.jsonl";
pub const INGEST_ERRORS: &str = "ingest_errors.jsonl";
pub const PREPROCESSED: &str = "preprocessed.jsonl";
pub const INPUTS: &str = "inputs.jsonl";
pub const TRANSCRIPTS: &str = "transcripts.jsonl";
pub const PAIRS: &str = "pairs.jsonl";
pub const DATASET: &str = "dataset.jsonl";
pub const EXPORT: &str = "export";
pub const COORDS: &str = "coords.csv";

/// Parses `args` (program name first) and runs the subcommand.
pub fn run_from_args<I, T>(args: I) -> Result<Report, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
    run(cli)
}

pub fn run(cli: Cli) -> Result<Report, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::from_env()?,
    };
    if let Some(w) = cli.work_dir {
        cfg.paths.work_dir = w;
    }
    if let Some(n) = cli.workers {
        cfg.workers = n;
    }
    let table = cfg.prefix_table()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers())
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker threads: {e}")))?;
    let env = Env { cfg, table, pool };
    match &cli.command {
        Command::Ingest(a) => ingest(&env, a),
        Command::Stats(a) => stats(&env, a),
        Command::Preprocess(a) => preprocess(&env, a),
        Command::Enrich(a) => enrich(&env, a),
        Command::Generate(a) => generate(&env, a),
        Command::Validate(a) => validate(&env, a),
        Command::Split(a) => split(&env, a),
        Command::Export(a) => export(&env, a),
        Command::Coords(a) => coords(&env, a),
    }
}

#[derive(Serialize)]
struct IngestError<'a> {
    file: &'a Path,
    row: usize,
    cause: String,
}

fn ingest(env: &Env, a: &IngestArgs) -> Result<Report, CliError> {
    let out = or_work(&a.output, env, ENTRIES);
    let map = ColumnMap {
        query: a.query_col,
        timestamp: a.ts_col,
        category: a.category_col,
        delimiter: a.delimiter,
        plus_as_space: !a.keep_plus,
    };
    let reader = LogReader {
        map,
        category: Some(a.category_filter.clone()).filter(|c| !c.is_empty()),
        interval: a.interval.clone(),
        table: &env.table,
    };
    let mut entries = AtomicFile::create(&out)?;
    let mut errors = AtomicFile::create(&out.with_file_name(INGEST_ERRORS))?;
    let mut dedup = Deduplicator::new();
    let mut counts = IngestCounts::default();
    let mut intervals: BTreeMap<String, u64> = BTreeMap::new();
    for path in &a.input {
        let input = open_input(path)?;
        let mut write_err = None;
        let mut bad: Vec<DecodeError> = Vec::new();
        env.pool
            .install(|| {
                reader.read(
                    input,
                    &mut dedup,
                    &mut counts,
                    |e: LogEntry| {
                        *intervals.entry(e.interval.clone()).or_default() += 1;
                        entries.write_record(&e).map_err(|e| {
                            let msg = e.to_string();
                            write_err = Some(e);
                            std::io::Error::other(msg)
                        })
                    },
                    |e| bad.push(e),
                )
            })
            .map_err(|source| match write_err.take() {
                Some(e) => CliError::Records(e),
                None => CliError::Io { path: path.clone(), source },
            })?;
        for e in bad {
            errors.write_record(&IngestError { file: path, row: e.row, cause: e.cause.to_string() })?;
        }
    }
    entries.commit()?;
    errors.commit()?;
    Ok(Report {
        command: "ingest",
        summary: json!({"output": out, "counts": counts, "intervals": intervals}),
        failed: 0,
    })
}

/// Reads the queries of a dataset, entry or query file.
pub fn read_queries(path: &Path, format: QueryFormat) -> Result<Vec<String>, CliError> {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("").trim_end_matches(".gz");
    let format = match format {
        QueryFormat::Auto if name.ends_with(".jsonl") || name.ends_with(".json") => QueryFormat::Jsonl,
        QueryFormat::Auto if name.ends_with(".tsv") => QueryFormat::Tsv,
        QueryFormat::Auto => QueryFormat::Text,
        f => f,
    };
    if format == QueryFormat::Jsonl {
        let mut out = Vec::new();
        for_each_jsonl(path, |line, v: Value| {
            let q = ["sparql", "raw_query", "query"].iter().find_map(|k| v.get(*k).and_then(Value::as_str));
            match q {
                Some(q) => {
                    out.push(q.to_string());
                    Ok(())
                }
                None => Err(RecordError::Schema {
                    path: path.into(),
                    line,
                    message: "no sparql, raw_query or query field".into(),
                }),
            }
        })?;
        return Ok(out);
    }
    let mut text = String::new();
    std::io::Read::read_to_string(&mut open_input(path)?, &mut text)
        .map_err(|source| CliError::Io { path: path.into(), source })?;
    Ok(match format {
        QueryFormat::Tsv => text
            .lines()
            .enumerate()
            .filter(|(i, l)| !(*i == 0 && l.split('\t').next() == Some("query")))
            .filter_map(|(_, l)| l.split('\t').next().map(str::trim).filter(|q| !q.is_empty()).map(String::from))
            .collect(),
        _ if text.lines().any(|l| l.trim() == "#---") => text
            .split('\n')
            .collect::<Vec<_>>()
            .split(|l| l.trim() == "#---")
            .map(|chunk| chunk.join("\n").trim().to_string())
            .filter(|q| !q.is_empty())
            .collect(),
        _ => text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect(),
    })
}

fn stats(env: &Env, a: &StatsArgs) -> Result<Report, CliError> {
    let queries = read_queries(&a.input, a.format)?;
    let report = compute_corpus_stats(queries.iter().map(String::as_str), &env.table);
    let report = serde_json::to_value(&report).unwrap_or(Value::Null);
    let summary = match &a.output {
        Some(p) => {
            let mut f = AtomicFile::create(p)?;
            serde_json::to_writer_pretty(f.writer(), &report).map_err(|e| CliError::Io { path: p.clone(), source: e.into() })?;
            f.commit()?;
            json!({"output": p, "queries": report["queries"], "parse_failures": report["parse_failures"]})
        }
        None => json!({"report": report}),
    };
    Ok(Report { command: "stats", summary, failed: 0 })
}

/// A log entry after label-service stripping and projection pruning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreprocessedEntry {
    pub entry: LogEntry,
    pub preprocessed_query: String,
    pub label_service_removed: bool,
    pub markers: AnonymizationMarkers,
}

/// `None` when the query does not parse.
pub fn preprocess_entry(entry: LogEntry, table: &PrefixTable) -> Option<PreprocessedEntry> {
    let q = parse_query_with(&entry.raw_query, table).ok()?;
    let markers = detect_anonymization_markers(&q);
    let stripped = strip_label_service(q.clone());
    let label_service_removed = stripped != q;
    let pre = prune_unused_select_vars(stripped);
    Some(PreprocessedEntry { preprocessed_query: serialize_query(&pre), label_service_removed, markers, entry })
}

fn preprocess(env: &Env, a: &IoArgs) -> Result<Report, CliError> {
    let input = or_work(&a.input, env, ENTRIES);
    let out = or_work(&a.output, env, PREPROCESSED);
    let entries: Vec<LogEntry> = read_jsonl(&input)?;
    let done: Vec<Option<PreprocessedEntry>> =
        env.pool.install(|| entries.into_par_iter().map(|e| preprocess_entry(e, &env.table)).collect());
    let mut f = AtomicFile::create(&out)?;
    let (mut kept, mut unparsed, mut stripped, mut marked) = (0u64, 0u64, 0u64, 0u64);
    for p in done {
        let Some(p) = p else {
            unparsed += 1;
            continue;
        };
        kept += 1;
        stripped += p.label_service_removed as u64;
        marked += (p.markers.has_literals || p.markers.has_variables) as u64;
        f.write_record(&p)?;
    }
    f.commit()?;
    Ok(Report {
        command: "preprocess",
        summary: json!({"output": out, "kept": kept, "unparsed": unparsed, "label_service_removed": stripped, "anonymized": marked}),
        failed: 0,
    })
}

fn enrich(env: &Env, a: &IoArgs) -> Result<Report, CliError> {
    let input = or_work(&a.input, env, PREPROCESSED);
    let out = or_work(&a.output, env, INPUTS);
    let entries: Vec<PreprocessedEntry> = read_jsonl(&input)?;
    let endpoint = env.endpoint()?;
    let cfg = &env.cfg;
    let built: Vec<Option<AgentInput>> = env.pool.install(|| {
        entries
            .par_iter()
            .map(|p| build_agent_input(&p.entry, &endpoint, &env.table, &cfg.enrich, &cfg.limits).ok())
            .collect()
    });
    let mut f = AtomicFile::create(&out)?;
    let (mut written, mut failed, mut degraded) = (0u64, 0u64, 0u64);
    for b in built {
        match b {
            Some(i) => {
                degraded += i.document.contains("execution failed: ") as u64;
                written += 1;
                f.write_record(&i)?;
            }
            None => failed += 1,
        }
    }
    f.commit()?;
    Ok(Report {
        command: "enrich",
        summary: json!({"output": out, "inputs": written, "execution_failed": degraded, "unparsed": failed}),
        failed,
    })
}

/// One script per agent input, for the `script` backend.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScriptRecord {
    pub id: String,
    pub turns: Vec<ModelTurn>,
}

enum Backends {
    Shared(OpenAiBackend),
    Scripts(BTreeMap<String, Vec<ModelTurn>>),
}

impl Backends {
    fn load(cfg: &PipelineConfig) -> Result<Self, CliError> {
        match cfg.llm.backend.as_str() {
            "script" => {
                let path = cfg.llm.script.as_ref().ok_or_else(|| CliError::Usage("llm.script is not set".into()))?;
                let records: Vec<ScriptRecord> = read_jsonl(path)?;
                Ok(Backends::Scripts(records.into_iter().map(|r| (r.id, r.turns)).collect()))
            }
            _ => Ok(Backends::Shared(OpenAiBackend::new(&cfg.llm)?)),
        }
    }

    fn run(&self, id: &str, f: impl FnOnce(&dyn ChatBackend) -> AgentOutcome) -> (AgentOutcome, String) {
        match self {
            Backends::Shared(b) => (f(b), b.model_id()),
            Backends::Scripts(m) => {
                let b = ScriptedBackend::new(m.get(id).cloned().unwrap_or_default());
                (f(&b), b.model_id())
            }
        }
    }
}

/// Ids of the sessions already stored.
fn stored_ids(path: &Path) -> Result<BTreeSet<String>, CliError> {
    let mut ids = BTreeSet::new();
    if path.exists() {
        for_each_jsonl(path, |_, r: TranscriptRecord| {
            ids.insert(r.id);
            Ok(())
        })?;
    }
    Ok(ids)
}

fn generate(env: &Env, a: &GenerateArgs) -> Result<Report, CliError> {
    let input = or_work(&a.input, env, INPUTS);
    let store = or_work(&a.transcripts, env, TRANSCRIPTS);
    let inputs: Vec<AgentInput> = read_jsonl(&input)?;
    let done = stored_ids(&store)?;
    let mut todo: Vec<&AgentInput> = inputs.iter().filter(|i| !done.contains(&i.id)).collect();
    let skipped = inputs.len() - todo.len();
    if let Some(n) = a.limit {
        todo.truncate(n);
    }
    let backends = Backends::load(&env.cfg)?;
    let endpoint = env.endpoint()?;
    let cfg = &env.cfg;
    let search = SparqlSearch { endpoint: &endpoint, enrich: &cfg.enrich };
    let ctx = ToolContext { endpoint: &endpoint, search: &search, table: &env.table, enrich: &cfg.enrich, limits: &cfg.limits };
    let limits = RunLimits { max_steps: cfg.limits.max_steps, reiterations: cfg.limits.reiterations };
    let appender = Mutex::new(Appender::open(&store)?);
    let tally = Mutex::new(BTreeMap::<&'static str, u64>::new());
    env.pool.install(|| {
        todo.par_iter().try_for_each(|input| -> Result<(), CliError> {
            let (outcome, model) =
                backends.run(&input.id, |b| run_s2q(&input.document, b, &ctx, &cfg.enrich.kg_name, limits));
            let kind = if outcome.interrupted {
                "interrupted"
            } else {
                match outcome.kind {
                    crate::agent::OutcomeKind::Answered { .. } => "answered",
                    crate::agent::OutcomeKind::Cancelled { .. } => "cancelled",
                    crate::agent::OutcomeKind::Invalid { .. } => "invalid",
                }
            };
            *tally.lock().unwrap_or_else(|e| e.into_inner()).entry(kind).or_default() += 1;
            if !outcome.interrupted {
                let record = TranscriptRecord { id: input.id.clone(), interval: input.interval.clone(), model, outcome };
                appender.lock().unwrap_or_else(|e| e.into_inner()).append(&record)?;
            }
            Ok(())
        })
    })?;
    let tally = tally.into_inner().unwrap_or_default();
    let failed = tally.get("interrupted").copied().unwrap_or(0);
    Ok(Report {
        command: "generate",
        summary: json!({"transcripts": store, "skipped": skipped, "processed": todo.len(), "outcomes": tally}),
        failed,
    })
}

fn validate(env: &Env, a: &ValidateArgs) -> Result<Report, CliError> {
    let store = or_work(&a.transcripts, env, TRANSCRIPTS);
    let out = or_work(&a.output, env, PAIRS);
    let mut latest: BTreeMap<String, TranscriptRecord> = BTreeMap::new();
    for_each_jsonl(&store, |_, r: TranscriptRecord| {
        latest.insert(r.id.clone(), r);
        Ok(())
    })?;
    let mut pairs: Vec<DatasetPair> = latest.values().filter_map(DatasetPair::from_transcript).collect();
    pairs.sort_by(|a, b| a.id.cmp(&b.id));
    pairs.dedup_by(|a, b| a.id == b.id);
    let endpoint = env.endpoint()?;
    let timeout = env.cfg.endpoint.timeout();
    env.pool.install(|| {
        pairs.par_iter_mut().for_each(|p| p.validation = validate_pair(p, &endpoint, &env.table, timeout));
    });
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for p in &pairs {
        *counts.entry(p.validation.to_string()).or_default() += 1;
    }
    export_pairs(&pairs, &out)?;
    let failed = counts.get("pending").copied().unwrap_or(0);
    Ok(Report {
        command: "validate",
        summary: json!({"output": out, "sessions": latest.len(), "pairs": pairs.len(), "validation": counts}),
        failed,
    })
}

fn embedder(cfg: &PipelineConfig) -> Result<Box<dyn Embedder>, CliError> {
    Ok(match cfg.embedding.backend.as_str() {
        "hashing" => Box::new(HashingEmbedder { dim: cfg.embedding.dim }),
        _ => Box::new(HttpEmbedder::new(&cfg.embedding)?),
    })
}

fn split(env: &Env, a: &SplitArgs) -> Result<Report, CliError> {
    let input = or_work(&a.input, env, PAIRS);
    let out = or_work(&a.output, env, DATASET);
    let mut cfg = env.cfg.split.clone();
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let mut pairs: Vec<DatasetPair> = import_pairs(&input)?.into_iter().filter(|p| p.validation == Validation::Valid).collect();
    let summary = if pairs.is_empty() {
        json!({"pairs": 0})
    } else {
        let questions: Vec<Vec<String>> = pairs.iter().map(|p| p.questions.clone()).collect();
        let e = embedder(&env.cfg)?;
        let vectors = env.pool.install(|| embed_pairs(&questions, e.as_ref(), env.cfg.embedding.batch_size))?;
        let r = cluster_and_split(&vectors, &cfg).map_err(|e| CliError::Split(e.to_string()))?;
        apply(&mut pairs, &r);
        serde_json::to_value(r.summary()).unwrap_or(Value::Null)
    };
    export_pairs(&pairs, &out)?;
    Ok(Report { command: "split", summary: json!({"output": out, "seed": cfg.seed, "split": summary}), failed: 0 })
}

fn export(env: &Env, a: &ExportArgs) -> Result<Report, CliError> {
    let input = or_work(&a.input, env, DATASET);
    let dir = or_work(&a.out_dir, env, EXPORT);
    let seed = a.seed.unwrap_or(env.cfg.split.seed);
    let pairs = import_pairs(&input)?;
    if let Some(p) = pairs.iter().find(|p| p.split.is_none() || p.cluster_id.is_none()) {
        return Err(CliError::Usage(format!("pair {} has no split or cluster; run split first", p.id)));
    }
    let valid: Vec<DatasetPair> = pairs.into_iter().filter(|p| p.validation == Validation::Valid).collect();
    export_pairs(&valid, &dir.join(DATASET))?;
    let full = export_kgqa(&valid, &dir.join("kgqa"))?;

    // Cluster ids are dense per split run; map them to positions first.
    let mut dense: BTreeMap<u64, usize> = BTreeMap::new();
    let ids: Vec<usize> = valid.iter().filter_map(|p| p.cluster_id).map(|c| {
        let n = dense.len();
        *dense.entry(c).or_insert(n)
    }).collect();
    let keep = dedup_one_per_cluster(&ids, seed);
    let dedup = export_kgqa(keep.iter().map(|i| &valid[*i]), &dir.join("kgqa_dedup"))?;
    Ok(Report {
        command: "export",
        summary: json!({"out_dir": dir, "pairs": valid.len(), "kgqa": full, "kgqa_dedup": dedup, "clusters": dense.len()}),
        failed: 0,
    })
}

fn coords(env: &Env, a: &IoArgs) -> Result<Report, CliError> {
    let input = or_work(&a.input, env, DATASET);
    let out = or_work(&a.output, env, COORDS);
    let pairs = import_pairs(&input)?;
    let n = write_coords(&pairs, &out)?;
    Ok(Report { command: "coords", summary: json!({"output": out, "points": n}), failed: 0 })
}
