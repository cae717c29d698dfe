//! End-to-end audit run: score both corpora, write the score tables, and
//! compute the disparity report.

use std::path::{Path, PathBuf};

use dialect_audit_core::scorer::score_posts;
use dialect_audit_core::{DialectCorpus, DialectGroup, ScoreError, ThresholdGrid};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::CorpusManifest;
use crate::report::{
    compute_report, write_plot_data, write_report, DisparityReport, ReportError, ReportMetadata,
    ReportParams, DEFAULT_HISTOGRAM_BINS,
};
use crate::scoring::LoadedScorer;
use crate::table::{write_score_table, ScoreTable, TableError};

pub const AAE_SCORES: &str = "aae_scores.csv";
pub const SAE_SCORES: &str = "sae_scores.csv";
pub const REPORT_FILE: &str = "report.json";
pub const PLOT_DIR: &str = "plot";

#[derive(Debug, Error)]
pub enum AuditError {
    #[error("invalid audit configuration: {0}")]
    Config(String),
    #[error("{group} corpus: {source}")]
    Score { group: DialectGroup, source: ScoreError },
    #[error(transparent)]
    Table(#[from] TableError),
    #[error(transparent)]
    Report(#[from] ReportError),
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditConfig {
    pub grid: ThresholdGrid,
    pub histogram_bins: usize,
    pub output_dir: PathBuf,
    pub seed: Option<u64>,
    pub timestamp: Option<String>,
}

impl AuditConfig {
    pub fn new(output_dir: impl Into<PathBuf>) -> AuditConfig {
        AuditConfig {
            grid: ThresholdGrid::default(),
            histogram_bins: DEFAULT_HISTOGRAM_BINS,
            output_dir: output_dir.into(),
            seed: None,
            timestamp: None,
        }
    }

    pub fn validate(&self) -> Result<(), AuditError> {
        ThresholdGrid::new(self.grid.start, self.grid.stop, self.grid.step)
            .map_err(|e| AuditError::Config(e.to_string()))?;
        if self.histogram_bins == 0 {
            return Err(AuditError::Config("histogram_bins must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct AuditOutput {
    pub report: DisparityReport,
    pub aae_scores: PathBuf,
    pub sae_scores: PathBuf,
    pub report_path: PathBuf,
}

/// Removes the paths it tracks when dropped; cleared on success.
struct Cleanup(Vec<PathBuf>);

impl Drop for Cleanup {
    fn drop(&mut self) {
        for path in &self.0 {
            let _ = if path.is_dir() { std::fs::remove_dir_all(path) } else { std::fs::remove_file(path) };
        }
    }
}

fn check_group(corpus: &DialectCorpus, expected: DialectGroup) -> Result<(), AuditError> {
    if corpus.group != expected {
        return Err(AuditError::Config(format!(
            "expected a {expected} corpus, got {}",
            corpus.group
        )));
    }
    if corpus.posts.is_empty() {
        return Err(AuditError::Config(format!("{expected} corpus has no posts")));
    }
    Ok(())
}

/// Scores both corpora concurrently and writes `aae_scores.csv`,
/// `sae_scores.csv`, `report.json` and the `plot/` series into the output
/// directory. On failure, files this run created are removed again; files
/// that existed beforehand are left in place.
pub fn run_audit(
    aae: &DialectCorpus,
    sae: &DialectCorpus,
    scorer: &LoadedScorer,
    config: &AuditConfig,
) -> Result<AuditOutput, AuditError> {
    config.validate()?;
    check_group(aae, DialectGroup::Aae)?;
    check_group(sae, DialectGroup::Sae)?;

    let (aae_scored, sae_scored) = std::thread::scope(|s| {
        let a = s.spawn(|| score_posts(scorer, &aae.posts));
        let b = score_posts(scorer, &sae.posts);
        (a.join().expect("scoring thread panicked"), b)
    });
    let aae_scored = aae_scored.map_err(|source| AuditError::Score { group: DialectGroup::Aae, source })?;
    let sae_scored = sae_scored.map_err(|source| AuditError::Score { group: DialectGroup::Sae, source })?;

    let provenance = Some(crate::scoring::describe(scorer));
    let aae_table = ScoreTable::from_scored(DialectGroup::Aae, provenance.clone(), aae_scored);
    let sae_table = ScoreTable::from_scored(DialectGroup::Sae, provenance, sae_scored);

    let mut metadata = ReportMetadata::new();
    metadata.timestamp = config.timestamp.clone();
    metadata.seed = config.seed;
    metadata.corpora = vec![CorpusManifest::of(aae), CorpusManifest::of(sae)];
    let params = ReportParams { grid: config.grid, histogram_bins: config.histogram_bins };
    let report = compute_report(&aae_table, &sae_table, &params, metadata)?;

    write_outputs(&config.output_dir, &aae_table, &sae_table, &report)
}

fn write_outputs(
    dir: &Path,
    aae: &ScoreTable,
    sae: &ScoreTable,
    report: &DisparityReport,
) -> Result<AuditOutput, AuditError> {
    let mut cleanup = Cleanup(Vec::new());
    let track = |path: &Path, cleanup: &mut Cleanup| {
        if !path.exists() {
            cleanup.0.push(path.to_path_buf());
        }
    };
    track(dir, &mut cleanup);
    std::fs::create_dir_all(dir).map_err(|source| AuditError::Io { path: dir.into(), source })?;
    let out = AuditOutput {
        report: report.clone(),
        aae_scores: dir.join(AAE_SCORES),
        sae_scores: dir.join(SAE_SCORES),
        report_path: dir.join(REPORT_FILE),
    };
    let plot_dir = dir.join(PLOT_DIR);
    for path in [&out.aae_scores, &out.sae_scores, &plot_dir, &out.report_path] {
        track(path, &mut cleanup);
    }
    write_score_table(aae, &out.aae_scores)?;
    write_score_table(sae, &out.sae_scores)?;
    write_plot_data(report, &plot_dir)?;
    write_report(report, &out.report_path)?;
    cleanup.0.clear();
    log::info!("wrote {}", out.report_path.display());
    Ok(out)
}
