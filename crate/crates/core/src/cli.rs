//! The `qeck` command-line tool.
//!
//! JSON results go to stdout and diagnostics to stderr. Exit status is 0 on
//! success, 1 on runtime failure and 2 on usage errors. Search settings come
//! from flags, then the config file (`--config` or `QECK_CONFIG`), then the
//! built-in defaults.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};

use crate::code::{ingest_jsonl, ingest_tree};
use crate::engine::{read_queries, QeckConfig, QeckEngine, QuerySpec};
use crate::error::{Error, Result};
use crate::eval::{evaluate_runs, format_table, read_judgments_csv, read_run};
use crate::qa::{build_qa_index, pair_posts_file, read_id_list, read_pairs_jsonl};
use crate::text::AnalyzerConfig;

pub const CONFIG_ENV: &str = "QECK_CONFIG";

#[derive(Debug, Parser)]
#[command(name = "qeck", version, about = "Code search with query expansion from Q&A pairs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Pair questions with accepted answers and index them.
    BuildQaIndex(BuildQaArgs),
    /// Extract methods from Java sources (or read snippets) and index them.
    BuildCodeIndex(BuildCodeArgs),
    /// Search the code index, expanding the query through the Q&A index.
    Search(SearchArgs),
    /// Score one or two runs against relevance judgments.
    Eval(EvalArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["posts", "pairs_jsonl"])))]
struct BuildQaArgs {
    /// Stack Exchange posts.xml dump.
    #[arg(long)]
    posts: Option<PathBuf>,
    /// Pre-paired Q&A pairs, one JSON object per line.
    #[arg(long)]
    pairs_jsonl: Option<PathBuf>,
    /// Only questions carrying this tag are paired.
    #[arg(long, default_value = "android")]
    tag: String,
    #[arg(long)]
    out: PathBuf,
    /// Stop-word list replacing the built-in one.
    #[arg(long)]
    stopwords: Option<PathBuf>,
    /// Post ids (one per line) whose pairs are left out.
    #[arg(long)]
    exclude_ids: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["src", "jsonl"])))]
struct BuildCodeArgs {
    /// Directory tree of .java files.
    #[arg(long)]
    src: Option<PathBuf>,
    /// Snippets, one JSON object per line.
    #[arg(long)]
    jsonl: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    stopwords: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["query", "queries"])))]
struct SearchArgs {
    #[arg(long)]
    qa: PathBuf,
    #[arg(long)]
    code: PathBuf,
    #[arg(long)]
    query: Option<String>,
    /// Query file with `id<TAB>text` lines.
    #[arg(long)]
    queries: Option<PathBuf>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    k: Option<usize>,
    /// BM25 candidates fused in the first pass.
    #[arg(long)]
    pool: Option<usize>,
    /// Plain BM25 on the original query.
    #[arg(long)]
    baseline: bool,
    /// Include feedback pairs and expansion terms.
    #[arg(long)]
    explain: bool,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    no_timestamp: bool,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Run file; give twice to compare two runs.
    #[arg(long = "run", required = true, num_args = 1, action = clap::ArgAction::Append)]
    runs: Vec<PathBuf>,
    #[arg(long)]
    judgments: PathBuf,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Print the summary table instead of JSON.
    #[arg(long)]
    table: bool,
    #[arg(long)]
    no_timestamp: bool,
}

/// Provenance recorded with every search and eval output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<QeckConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub qa_index_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub code_index_path: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<String>,
}

impl RunManifest {
    fn new(with_timestamp: bool) -> Self {
        RunManifest {
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: with_timestamp
                .then(|| humantime::format_rfc3339_seconds(SystemTime::now()).to_string()),
            config: None,
            qa_index_path: None,
            code_index_path: None,
            mode: None,
            inputs: Vec::new(),
        }
    }
}

enum Failure {
    Usage(String),
    Runtime(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Runtime(e)
    }
}

/// Runs the tool with explicit argument list and output streams; returns the exit status.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{text}")
            } else {
                write!(stderr, "{text}")
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::BuildQaIndex(a) => build_qa(a, stdout, stderr),
        Command::BuildCodeIndex(a) => build_code(a, stdout, stderr),
        Command::Search(a) => search(a, stdout),
        Command::Eval(a) => eval(a, stdout),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            2
        }
        Err(Failure::Runtime(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            1
        }
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    run_with(std::env::args_os(), &mut std::io::stdout(), &mut std::io::stderr())
}

fn emit(stdout: &mut dyn Write, value: &impl Serialize) -> Result<()> {
    serde_json::to_writer_pretty(&mut *stdout, value)?;
    writeln!(stdout)?;
    Ok(())
}

fn analyzer(stopwords: Option<&Path>) -> Result<AnalyzerConfig> {
    match stopwords {
        Some(p) => AnalyzerConfig::with_stopword_file(p),
        None => Ok(AnalyzerConfig::default()),
    }
}

fn path_string(p: &Path) -> String {
    p.display().to_string()
}

fn build_qa(a: BuildQaArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> std::result::Result<(), Failure> {
    let analyzer = analyzer(a.stopwords.as_deref())?;
    let exclude = match &a.exclude_ids {
        Some(p) => read_id_list(p)?,
        None => Vec::new(),
    };
    let (pairs, pairing, parsing) = match (&a.posts, &a.pairs_jsonl) {
        (Some(posts), _) => {
            let (pairs, pc, parse) = pair_posts_file(posts, &a.tag, exclude)?;
            (pairs, Some(pc), Some(parse))
        }
        (None, Some(jsonl)) => {
            let excluded: std::collections::BTreeSet<i64> = exclude.into_iter().collect();
            let pairs = read_pairs_jsonl(jsonl)?
                .into_iter()
                .filter(|p| !excluded.contains(&p.question_id) && !excluded.contains(&p.answer_id))
                .collect();
            (pairs, None, None)
        }
        (None, None) => unreachable!("clap requires one input"),
    };
    let report = build_qa_index(&pairs, &analyzer, &a.out)?;
    if report.indexed == 0 {
        let _ = writeln!(stderr, "warning: the Q&A index is empty");
    }
    emit(
        stdout,
        &json!({
            "out": path_string(&a.out),
            "pairs": pairs.len(),
            "indexed": report.indexed,
            "skipped_empty": report.skipped_empty,
            "skipped_duplicate": report.skipped_duplicate,
            "pairing": pairing,
            "parsing": parsing,
            "index": report.stats,
        }),
    )?;
    Ok(())
}

fn build_code(a: BuildCodeArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> std::result::Result<(), Failure> {
    let analyzer = analyzer(a.stopwords.as_deref())?;
    let report = match (&a.src, &a.jsonl) {
        (Some(src), _) => ingest_tree(src, &analyzer, &a.out)?,
        (None, Some(jsonl)) => ingest_jsonl(jsonl, &analyzer, &a.out)?,
        (None, None) => unreachable!("clap requires one input"),
    };
    if report.stats.doc_count == 0 {
        let _ = writeln!(stderr, "warning: no code snippets were indexed");
    }
    if report.files_unbalanced + report.files_unreadable > 0 {
        let _ = writeln!(
            stderr,
            "warning: skipped {} unreadable and {} unbalanced files",
            report.files_unreadable, report.files_unbalanced
        );
    }
    emit(
        stdout,
        &json!({
            "out": path_string(&a.out),
            "snippets": report.stats.doc_count,
            "report": report,
        }),
    )?;
    Ok(())
}

/// Reads a config file: `key = value` lines in TOML syntax.
pub fn load_config_file(path: &Path) -> Result<QeckConfig> {
    let text = std::fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| Error::param(format!("{}: {e}", path.display())))
}

/// Flags over the config file over defaults.
fn resolve_config(a: &SearchArgs) -> std::result::Result<QeckConfig, Failure> {
    let file = a
        .config
        .clone()
        .or_else(|| std::env::var_os(CONFIG_ENV).map(PathBuf::from));
    let mut config = match file {
        Some(p) => load_config_file(&p)?,
        None => QeckConfig::default(),
    };
    if let Some(m) = a.m {
        config.m = m;
        if a.pool.is_none() {
            config.first_pass_pool = config.first_pass_pool.max(m);
        }
    }
    if let Some(n) = a.n {
        config.n = n;
    }
    if let Some(k) = a.k {
        config.k = k;
    }
    if let Some(pool) = a.pool {
        config.first_pass_pool = pool;
    }
    config.validate().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(config)
}

fn search(a: SearchArgs, stdout: &mut dyn Write) -> std::result::Result<(), Failure> {
    let config = resolve_config(&a)?;
    for dir in [&a.qa, &a.code] {
        if !dir.is_dir() {
            return Err(Error::param(format!("index directory {} does not exist", dir.display())).into());
        }
    }
    let engine = QeckEngine::open(&a.qa, &a.code)?;
    let mut manifest = RunManifest::new(!a.no_timestamp);
    manifest.config = Some(config.clone());
    manifest.qa_index_path = Some(path_string(&a.qa));
    manifest.code_index_path = Some(path_string(&a.code));
    manifest.mode = Some(if a.baseline { "baseline" } else { "qeck" }.to_string());

    let one = |text: &str| -> Result<Value> {
        if a.baseline {
            let hits = engine.baseline(text, config.k)?;
            return Ok(json!({ "query": text, "hits": hits }));
        }
        let out = engine.search(text, &config)?;
        Ok(if a.explain {
            json!({
                "query": text,
                "expanded": out.expanded,
                "feedback": out.feedback,
                "hits": out.hits,
            })
        } else {
            json!({ "query": text, "hits": out.hits })
        })
    };

    let body = match (&a.query, &a.queries) {
        (Some(q), _) => {
            let mut v = one(q)?;
            v["manifest"] = serde_json::to_value(&manifest).map_err(Error::from)?;
            v
        }
        (None, Some(path)) => {
            manifest.inputs.push(path_string(path));
            let specs: Vec<QuerySpec> = read_queries(path)?;
            let mut queries = serde_json::Map::new();
            for s in &specs {
                queries.insert(s.id.clone(), one(&s.text)?);
            }
            json!({ "manifest": manifest, "queries": queries })
        }
        (None, None) => unreachable!("clap requires one input"),
    };
    emit(stdout, &body)?;
    Ok(())
}

fn eval(a: EvalArgs, stdout: &mut dyn Write) -> std::result::Result<(), Failure> {
    if a.runs.len() > 2 {
        return Err(Failure::Usage(format!(
            "at most two --run files can be compared, got {}",
            a.runs.len()
        )));
    }
    if a.k < 1 {
        return Err(Failure::Usage("--k must be at least 1".into()));
    }
    let judgments = read_judgments_csv(&a.judgments)?;
    let mut runs = Vec::new();
    for (i, path) in a.runs.iter().enumerate() {
        let stem = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        let name = if runs.iter().any(|(n, _)| *n == stem) {
            format!("{stem}#{}", i + 1)
        } else {
            stem
        };
        runs.push((name, read_run(path)?));
    }
    let report = evaluate_runs(&runs, &judgments, a.k)?;
    if a.table {
        write!(stdout, "{}", format_table(&report)).map_err(Error::from)?;
        return Ok(());
    }
    let mut manifest = RunManifest::new(!a.no_timestamp);
    manifest.inputs = a.runs.iter().map(|p| path_string(p)).collect();
    manifest.inputs.push(path_string(&a.judgments));
    emit(stdout, &json!({ "manifest": manifest, "report": report }))?;
    Ok(())
}
