//! Command-line interface. Every flag can also come from a `--config` file
//! (TOML, or JSON when the name ends in `.json`); flags win over the file,
//! and the file wins over built-in defaults.
//!
//! Exit codes: 0 success, 1 internal failure, 2 usage or input error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, Write};
use std::net::{IpAddr, Ipv4Addr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use dialect_audit_core::corpus::{DEFAULT_FILTER_THRESHOLD, DEFAULT_SAMPLE_SIZE};
use dialect_audit_core::scorer::score_posts;
use dialect_audit_core::{fpr_curve, DialectGroup, Label, ThresholdGrid};
use serde::Deserialize;

use crate::audit::{run_audit, AuditConfig, AuditError};
use crate::ingest::{
    ingest_corpus, read_corpus, write_corpus, ColumnMapping, ColumnRef, IngestError, IngestParams,
};
use crate::report::{
    compute_report, fpr_csv, render_markdown, write_plot_data, write_report, ReportError,
    ReportMetadata, ReportParams, DEFAULT_HISTOGRAM_BINS,
};
use crate::scoring::{load_scorer, LoadError, LoadedScorer, ModelSource, ScorerConfig};
use crate::service::{self, ServiceConfig};
use crate::table::{read_score_table, write_score_table, ScoreTable, TableError};

const DEFAULT_SEED: u64 = 0;
const DEFAULT_PORT: u16 = 8000;

#[derive(Debug, Parser)]
#[command(name = "dialect-audit", version, about = "Audit a toxicity classifier for dialect bias")]
pub struct Cli {
    /// TOML or JSON file supplying defaults for any flag.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// More log output on stderr (-v debug, -vv trace).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    /// Only log errors.
    #[arg(short, long, global = true, conflicts_with = "verbose")]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Filter a tab-separated corpus by dialect posterior and draw a seeded sample.
    Ingest(IngestArgs),
    /// Score a sampled corpus and write a score table.
    Score(ScoreArgs),
    /// Compute the disparity report from an AAE and an SAE score table.
    Report(ReportArgs),
    /// Write false-positive rate curves over a threshold grid as CSV.
    Sweep(SweepArgs),
    /// Score two sampled corpora and write tables, report and plot data.
    Audit(AuditArgs),
    /// Run the prediction API.
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct ScorerArgs {
    /// `reference` or the path of an ONNX model.
    #[arg(long, value_name = "MODEL")]
    pub model: Option<ModelSource>,
    /// tokenizer.json path [default: next to the model]
    #[arg(long, value_name = "FILE")]
    pub tokenizer: Option<PathBuf>,
    /// Token budget per text [default: 512]
    #[arg(long)]
    pub max_tokens: Option<usize>,
    /// Texts per scoring batch [default: 32]
    #[arg(long)]
    pub batch_size: Option<usize>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Tab-separated input file.
    #[arg(long, value_name = "TSV")]
    pub input: PathBuf,
    /// Dialect group to extract: AAE or SAE.
    #[arg(long)]
    pub group: DialectGroup,
    /// Output JSONL; a `.manifest.json` sidecar is written next to it.
    #[arg(long, short, value_name = "JSONL")]
    pub output: PathBuf,
    /// Minimum group posterior, in (0.5, 1) [default: 0.8]
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Posts to sample [default: 10000]
    #[arg(long)]
    pub sample_size: Option<usize>,
    /// Sampling seed [default: 0]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Text column: header name or zero-based index [default: text]
    #[arg(long)]
    pub text_column: Option<ColumnRef>,
    /// AAE posterior column [default: p_aa]
    #[arg(long)]
    pub p_aa_column: Option<ColumnRef>,
    /// White-aligned posterior column [default: p_white]
    #[arg(long)]
    pub p_white_column: Option<ColumnRef>,
    /// The input has no header row; columns must be given by index.
    #[arg(long)]
    pub no_header: bool,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    /// Corpus JSONL written by `ingest`.
    #[arg(long, value_name = "JSONL")]
    pub corpus: PathBuf,
    /// Output score table (CSV).
    #[arg(long, short, value_name = "CSV")]
    pub output: PathBuf,
    #[command(flatten)]
    pub scorer: ScorerArgs,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Threshold grid as start:stop:step [default: 0:1:0.01]
    #[arg(long, value_name = "START:STOP:STEP")]
    pub grid: Option<ThresholdGrid>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// AAE score table.
    #[arg(long, value_name = "CSV")]
    pub aae: PathBuf,
    /// SAE score table.
    #[arg(long, value_name = "CSV")]
    pub sae: PathBuf,
    /// Output report (JSON).
    #[arg(long, short, value_name = "JSON")]
    pub output: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Histogram bins over [0, 1] [default: 50]
    #[arg(long)]
    pub bins: Option<usize>,
    /// Also write plot series (means, box, histogram, fpr CSVs) here.
    #[arg(long, value_name = "DIR")]
    pub plot_dir: Option<PathBuf>,
    /// Also write a Markdown means table here.
    #[arg(long, value_name = "FILE")]
    pub markdown: Option<PathBuf>,
    /// Externally reported ratio to show in the Markdown table, e.g. toxicity=1.8.
    #[arg(long = "claim", value_name = "LABEL=RATIO", value_parser = parse_claim)]
    pub claims: Vec<(Label, f64)>,
    /// Seed recorded in the report metadata.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Timestamp recorded in the report; omitted by default so output is reproducible.
    #[arg(long)]
    pub timestamp: Option<String>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// AAE score table.
    #[arg(long, value_name = "CSV", required_unless_present = "sae")]
    pub aae: Option<PathBuf>,
    /// SAE score table.
    #[arg(long, value_name = "CSV")]
    pub sae: Option<PathBuf>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Output CSV [default: stdout]
    #[arg(long, short, value_name = "CSV")]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    /// AAE corpus JSONL written by `ingest`.
    #[arg(long, value_name = "JSONL")]
    pub aae: PathBuf,
    /// SAE corpus JSONL written by `ingest`.
    #[arg(long, value_name = "JSONL")]
    pub sae: PathBuf,
    /// Output directory.
    #[arg(long, short, value_name = "DIR")]
    pub output: PathBuf,
    #[command(flatten)]
    pub scorer: ScorerArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Histogram bins over [0, 1] [default: 50]
    #[arg(long)]
    pub bins: Option<usize>,
    /// Seed recorded in the report metadata.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Timestamp recorded in the report; omitted by default.
    #[arg(long)]
    pub timestamp: Option<String>,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    /// Bind address [default: 127.0.0.1]
    #[arg(long)]
    pub bind: Option<IpAddr>,
    /// Port; 0 picks a free one [default: 8000]
    #[arg(long)]
    pub port: Option<u16>,
    #[command(flatten)]
    pub scorer: ScorerArgs,
    /// Serve the built UI from this directory under `/`.
    #[arg(long, value_name = "DIR")]
    pub static_dir: Option<PathBuf>,
    /// Allowed CORS origin (repeatable) [default: any]
    #[arg(long = "cors-origin", value_name = "ORIGIN")]
    pub cors_origins: Vec<String>,
    /// Longest accepted text, in characters [default: 5000]
    #[arg(long)]
    pub max_text_chars: Option<usize>,
}

fn parse_claim(s: &str) -> Result<(Label, f64), String> {
    let (label, value) = s.split_once('=').ok_or("expected LABEL=RATIO")?;
    let label = Label::parse(label.trim()).ok_or_else(|| format!("unknown label {label:?}"))?;
    let value = value.trim().parse::<f64>().map_err(|e| e.to_string())?;
    Ok((label, value))
}

/// Values read from `--config`. Every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub ingest: IngestSection,
    pub scorer: ScorerSection,
    pub report: ReportSection,
    pub serve: ServeSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestSection {
    pub threshold: Option<f64>,
    pub sample_size: Option<usize>,
    pub text_column: Option<ColumnRef>,
    pub p_aa_column: Option<ColumnRef>,
    pub p_white_column: Option<ColumnRef>,
    pub has_header: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScorerSection {
    pub model: Option<ModelSource>,
    pub tokenizer: Option<PathBuf>,
    pub max_tokens: Option<usize>,
    pub batch_size: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSection {
    pub grid: Option<String>,
    pub bins: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServeSection {
    pub bind: Option<IpAddr>,
    pub port: Option<u16>,
    pub static_dir: Option<PathBuf>,
    pub cors_origins: Option<Vec<String>>,
    pub max_text_chars: Option<usize>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<ConfigFile, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        let parsed = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|e| CliError::input(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> CliError {
        CliError { code: 2, message: message.into() }
    }

    pub fn internal(message: impl Into<String>) -> CliError {
        CliError { code: 1, message: message.into() }
    }
}

impl From<IngestError> for CliError {
    fn from(e: IngestError) -> Self {
        match e {
            IngestError::Io { ref source, .. } if source.kind() != std::io::ErrorKind::NotFound => {
                CliError::internal(e.to_string())
            }
            _ => CliError::input(e.to_string()),
        }
    }
}

impl From<TableError> for CliError {
    fn from(e: TableError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<LoadError> for CliError {
    fn from(e: LoadError) -> Self {
        CliError::input(e.to_string())
    }
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        match e {
            ReportError::Io { .. } | ReportError::Json { .. } => CliError::internal(e.to_string()),
            _ => CliError::input(e.to_string()),
        }
    }
}

impl From<AuditError> for CliError {
    fn from(e: AuditError) -> Self {
        match e {
            AuditError::Config(_) => CliError::input(e.to_string()),
            AuditError::Report(r) => r.into(),
            _ => CliError::internal(e.to_string()),
        }
    }
}

fn grid_of(args: &GridArgs, config: &ConfigFile) -> Result<ThresholdGrid, CliError> {
    match (args.grid, &config.report.grid) {
        (Some(g), _) => Ok(g),
        (None, Some(s)) => s.parse().map_err(|e| CliError::input(format!("config report.grid: {e}"))),
        (None, None) => Ok(ThresholdGrid::default()),
    }
}

fn scorer_config(args: &ScorerArgs, config: &ConfigFile) -> ScorerConfig {
    let defaults = ScorerConfig::default();
    let section = &config.scorer;
    ScorerConfig {
        model: args.model.clone().or_else(|| section.model.clone()).unwrap_or(defaults.model),
        tokenizer: args.tokenizer.clone().or_else(|| section.tokenizer.clone()),
        max_tokens: args.max_tokens.or(section.max_tokens).unwrap_or(defaults.max_tokens),
        batch_size: args.batch_size.or(section.batch_size).unwrap_or(defaults.batch_size),
    }
}

fn load(args: &ScorerArgs, config: &ConfigFile) -> Result<LoadedScorer, CliError> {
    let cfg = scorer_config(args, config);
    let scorer = load_scorer(&cfg)?;
    log::info!("scorer {} (model sha256 {})", crate::scoring::describe(&scorer), scorer.model_digest());
    Ok(scorer)
}

fn write_file(path: &Path, body: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, body).map_err(|e| CliError::internal(format!("{}: {e}", path.display())))
}

fn cmd_ingest(args: IngestArgs, config: &ConfigFile) -> Result<(), CliError> {
    let section = &config.ingest;
    let defaults = ColumnMapping::default();
    let mapping = ColumnMapping {
        text: args.text_column.or_else(|| section.text_column.clone()).unwrap_or(defaults.text),
        p_aa: args.p_aa_column.or_else(|| section.p_aa_column.clone()).unwrap_or(defaults.p_aa),
        p_white: args
            .p_white_column
            .or_else(|| section.p_white_column.clone())
            .unwrap_or(defaults.p_white),
        has_header: !args.no_header && section.has_header.unwrap_or(true),
    };
    let params = IngestParams {
        group: args.group,
        filter_threshold: args.threshold.or(section.threshold).unwrap_or(DEFAULT_FILTER_THRESHOLD),
        sample_size: args.sample_size.or(section.sample_size).unwrap_or(DEFAULT_SAMPLE_SIZE),
        seed: args.seed.or(config.seed).unwrap_or(DEFAULT_SEED),
    };
    let file = File::open(&args.input)
        .map_err(|e| CliError::input(format!("{}: {e}", args.input.display())))?;
    let source = args.input.display().to_string();
    let corpus = ingest_corpus(BufReader::new(file), &source, &mapping, &params)?;
    write_corpus(&corpus, &args.output)?;
    log::info!("wrote {} posts to {}", corpus.posts.len(), args.output.display());
    Ok(())
}

fn cmd_score(args: ScoreArgs, config: &ConfigFile) -> Result<(), CliError> {
    let corpus = read_corpus(&args.corpus)?;
    if corpus.posts.is_empty() {
        return Err(CliError::input(format!("{}: corpus has no posts", args.corpus.display())));
    }
    let scorer = load(&args.scorer, config)?;
    let scored = score_posts(&scorer, &corpus.posts)
        .map_err(|e| CliError::internal(format!("scoring {}: {e}", args.corpus.display())))?;
    let provenance = Some(crate::scoring::describe(&scorer));
    let table = ScoreTable::from_scored(corpus.group, provenance, scored);
    write_score_table(&table, &args.output).map_err(|e| CliError::internal(e.to_string()))?;
    log::info!("wrote {} scores to {}", table.len(), args.output.display());
    Ok(())
}

fn cmd_report(args: ReportArgs, config: &ConfigFile) -> Result<(), CliError> {
    let aae = read_score_table(&args.aae)?;
    let sae = read_score_table(&args.sae)?;
    let params = ReportParams {
        grid: grid_of(&args.grid, config)?,
        histogram_bins: args.bins.or(config.report.bins).unwrap_or(DEFAULT_HISTOGRAM_BINS),
    };
    if params.histogram_bins == 0 {
        return Err(CliError::input("--bins must be at least 1"));
    }
    let mut metadata = ReportMetadata::new();
    metadata.seed = args.seed.or(config.seed);
    metadata.timestamp = args.timestamp;
    let report = compute_report(&aae, &sae, &params, metadata)?;
    write_report(&report, &args.output)?;
    if let Some(dir) = &args.plot_dir {
        write_plot_data(&report, dir)?;
    }
    if let Some(path) = &args.markdown {
        write_file(path, render_markdown(&report, &args.claims).as_bytes())?;
    }
    log::info!("wrote {}", args.output.display());
    Ok(())
}

fn cmd_sweep(args: SweepArgs, config: &ConfigFile) -> Result<(), CliError> {
    let thresholds = grid_of(&args.grid, config)?.points();
    let mut curves = Vec::new();
    for (name, path) in [("aae", &args.aae), ("sae", &args.sae)] {
        let Some(path) = path else { continue };
        let table = read_score_table(path)?;
        let curve = fpr_curve(&table.label_scores(Label::Toxicity), &thresholds)
            .map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
        curves.push((name, curve));
    }
    let refs: Vec<_> = curves.iter().map(|(n, c)| (*n, c)).collect();
    let csv = fpr_csv(&refs);
    match &args.output {
        Some(path) => write_file(path, csv.as_bytes()),
        None => std::io::stdout()
            .lock()
            .write_all(csv.as_bytes())
            .map_err(|e| CliError::internal(format!("stdout: {e}"))),
    }
}

fn cmd_audit(args: AuditArgs, config: &ConfigFile) -> Result<(), CliError> {
    let aae = read_corpus(&args.aae)?;
    let sae = read_corpus(&args.sae)?;
    let scorer = load(&args.scorer, config)?;
    let audit = AuditConfig {
        grid: grid_of(&args.grid, config)?,
        histogram_bins: args.bins.or(config.report.bins).unwrap_or(DEFAULT_HISTOGRAM_BINS),
        output_dir: args.output,
        seed: args.seed.or(config.seed),
        timestamp: args.timestamp,
    };
    run_audit(&aae, &sae, &scorer, &audit)?;
    Ok(())
}

fn cmd_serve(args: ServeArgs, config: &ConfigFile) -> Result<(), CliError> {
    let section = &config.serve;
    let scorer = Arc::new(load(&args.scorer, config)?);
    let service_config = ServiceConfig {
        max_text_chars: args
            .max_text_chars
            .or(section.max_text_chars)
            .unwrap_or(service::DEFAULT_MAX_TEXT_CHARS),
        cors_origins: if args.cors_origins.is_empty() {
            section.cors_origins.clone()
        } else {
            Some(args.cors_origins)
        },
        static_dir: args.static_dir.or_else(|| section.static_dir.clone()),
    };
    if let Some(dir) = &service_config.static_dir {
        if !dir.is_dir() {
            return Err(CliError::input(format!("{}: not a directory", dir.display())));
        }
    }
    let app = service::router(scorer, &service_config).map_err(CliError::input)?;
    let addr = SocketAddr::new(
        args.bind.or(section.bind).unwrap_or(IpAddr::V4(Ipv4Addr::LOCALHOST)),
        args.port.or(section.port).unwrap_or(DEFAULT_PORT),
    );
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::internal(e.to_string()))?;
    runtime
        .block_on(service::serve(addr, app))
        .map_err(|e| CliError::internal(format!("{addr}: {e}")))
}

fn init_logging(verbose: u8, quiet: bool) {
    let level = match (quiet, verbose) {
        (true, _) => log::LevelFilter::Error,
        (false, 0) => log::LevelFilter::Info,
        (false, 1) => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .target(env_logger::Target::Stderr)
        .try_init();
}

/// Runs a parsed command line.
pub fn execute(cli: Cli) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Ingest(a) => cmd_ingest(a, &config),
        Command::Score(a) => cmd_score(a, &config),
        Command::Report(a) => cmd_report(a, &config),
        Command::Sweep(a) => cmd_sweep(a, &config),
        Command::Audit(a) => cmd_audit(a, &config),
        Command::Serve(a) => cmd_serve(a, &config),
    }
}

/// Parses `args`, runs the command, and maps the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    init_logging(cli.verbose, cli.quiet);
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{}", e.message);
            ExitCode::from(e.code)
        }
    }
}
