//! The disparity report: group means, ratios, and the plot series for the
//! toxicity label, stored as one versioned JSON document.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use dialect_audit_core::metrics::means_of;
use dialect_audit_core::{
    box_stats, disparity_ratios, fpr_curve, histogram, BoxStats, DialectGroup, DisparityRatios,
    FprCurve, GroupMeans, HistogramSeries, Label, MetricsError, Ratio, ThresholdGrid,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::CorpusManifest;
use crate::table::ScoreTable;

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_HISTOGRAM_BINS: usize = 50;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("expected a {expected} score table, got {found}")]
    WrongGroup { expected: DialectGroup, found: DialectGroup },
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", .path.display())]
    Json { path: PathBuf, source: serde_json::Error },
    #[error("{}: unsupported report schema version {found} (expected {REPORT_SCHEMA_VERSION})", .path.display())]
    SchemaVersion { path: PathBuf, found: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportParams {
    pub grid: ThresholdGrid,
    pub histogram_bins: usize,
}

impl Default for ReportParams {
    fn default() -> Self {
        ReportParams { grid: ThresholdGrid::default(), histogram_bins: DEFAULT_HISTOGRAM_BINS }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub tool_version: String,
    /// Only set when supplied explicitly, so identical inputs give
    /// byte-identical reports.
    pub timestamp: Option<String>,
    /// `backend:config-digest` of the scorer for each group's table.
    pub aae_scorer: Option<String>,
    pub sae_scorer: Option<String>,
    pub corpora: Vec<CorpusManifest>,
    pub seed: Option<u64>,
}

impl ReportMetadata {
    pub fn new() -> ReportMetadata {
        ReportMetadata { tool_version: env!("CARGO_PKG_VERSION").to_string(), ..Default::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisparityReport {
    pub schema_version: u32,
    pub params: ReportParams,
    pub aae_means: GroupMeans,
    pub sae_means: GroupMeans,
    pub ratios: DisparityRatios,
    /// Box statistics, histograms and FPR curves are for the toxicity label.
    pub aae_box: BoxStats,
    pub sae_box: BoxStats,
    pub aae_hist: HistogramSeries,
    pub sae_hist: HistogramSeries,
    pub aae_fpr: FprCurve,
    pub sae_fpr: FprCurve,
    pub metadata: ReportMetadata,
}

/// Computes every report component from two score tables.
pub fn compute_report(
    aae: &ScoreTable,
    sae: &ScoreTable,
    params: &ReportParams,
    mut metadata: ReportMetadata,
) -> Result<DisparityReport, ReportError> {
    for (table, expected) in [(aae, DialectGroup::Aae), (sae, DialectGroup::Sae)] {
        if table.group != expected {
            return Err(ReportError::WrongGroup { expected, found: table.group });
        }
    }
    let aae_means = means_of(aae.scores(), DialectGroup::Aae)?;
    let sae_means = means_of(sae.scores(), DialectGroup::Sae)?;
    let ratios = disparity_ratios(&aae_means, &sae_means)?;
    let aae_tox = aae.label_scores(Label::Toxicity);
    let sae_tox = sae.label_scores(Label::Toxicity);
    let thresholds = params.grid.points();
    metadata.aae_scorer = metadata.aae_scorer.or_else(|| aae.scorer.clone());
    metadata.sae_scorer = metadata.sae_scorer.or_else(|| sae.scorer.clone());
    Ok(DisparityReport {
        schema_version: REPORT_SCHEMA_VERSION,
        params: params.clone(),
        aae_box: box_stats(&aae_tox)?,
        sae_box: box_stats(&sae_tox)?,
        aae_hist: histogram(&aae_tox, params.histogram_bins)?,
        sae_hist: histogram(&sae_tox, params.histogram_bins)?,
        aae_fpr: fpr_curve(&aae_tox, &thresholds)?,
        sae_fpr: fpr_curve(&sae_tox, &thresholds)?,
        aae_means,
        sae_means,
        ratios,
        metadata,
    })
}

pub fn write_report(report: &DisparityReport, path: &Path) -> Result<(), ReportError> {
    let mut json = serde_json::to_vec_pretty(report)
        .map_err(|source| ReportError::Json { path: path.into(), source })?;
    json.push(b'\n');
    std::fs::write(path, json).map_err(|source| ReportError::Io { path: path.into(), source })
}

pub fn read_report(path: &Path) -> Result<DisparityReport, ReportError> {
    let bytes = std::fs::read(path).map_err(|source| ReportError::Io { path: path.into(), source })?;
    let json_err = |source| ReportError::Json { path: path.into(), source };
    let value: serde_json::Value = serde_json::from_slice(&bytes).map_err(json_err)?;
    let found = value.get("schema_version").and_then(|v| v.as_u64()).unwrap_or(0);
    if found != u64::from(REPORT_SCHEMA_VERSION) {
        return Err(ReportError::SchemaVersion { path: path.into(), found });
    }
    serde_json::from_value(value).map_err(json_err)
}

fn ratio_cell(r: Ratio) -> String {
    match r {
        Ratio::Defined(v) => format!("{v:.3}"),
        Ratio::Undefined => "undefined".to_string(),
    }
}

/// Markdown rendering of the means table. `published` lists externally
/// reported ratios to show next to the computed ones.
pub fn render_markdown(report: &DisparityReport, published: &[(Label, f64)]) -> String {
    let mut out = String::new();
    let with_published = !published.is_empty();
    let _ = writeln!(
        out,
        "| Label | AAE mean | SAE mean | AAE/SAE ratio |{}",
        if with_published { " Published ratio |" } else { "" }
    );
    let _ = writeln!(out, "|---|---|---|---|{}", if with_published { "---|" } else { "" });
    for label in Label::ALL {
        let _ = write!(
            out,
            "| {} | {:.6} | {:.6} | {} |",
            label.display_name(),
            report.aae_means.means.get(label),
            report.sae_means.means.get(label),
            ratio_cell(report.ratios.get(label)),
        );
        if with_published {
            match published.iter().find(|(l, _)| *l == label) {
                Some((_, v)) => {
                    let _ = write!(out, " {v}x |");
                }
                None => out.push_str(" |"),
            }
        }
        out.push('\n');
    }
    let _ = writeln!(
        out,
        "\nToxicity medians: AAE {:.4}, SAE {:.4} (n = {} / {})",
        report.aae_box.median, report.sae_box.median, report.aae_means.count, report.sae_means.count
    );
    out
}

/// Writes `means.csv`, `box.csv`, `histogram.csv` and `fpr.csv` into `dir`.
pub fn write_plot_data(report: &DisparityReport, dir: &Path) -> Result<(), ReportError> {
    let io_err = |path: PathBuf| move |source| ReportError::Io { path, source };
    std::fs::create_dir_all(dir).map_err(io_err(dir.into()))?;
    let mut files: Vec<(&str, String)> = Vec::new();

    let mut means = String::from("label,display_name,aae_mean,sae_mean,ratio\n");
    for label in Label::ALL {
        let ratio = report.ratios.get(label).value().map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(
            means,
            "{},{},{},{},{}",
            label,
            label.display_name(),
            report.aae_means.means.get(label),
            report.sae_means.means.get(label),
            ratio
        );
    }
    files.push(("means.csv", means));

    let mut boxes = String::from(
        "group,count,min,q1,median,q3,max,lower_fence,upper_fence,lower_whisker,upper_whisker,outlier_count\n",
    );
    for (group, b) in [("AAE", &report.aae_box), ("SAE", &report.sae_box)] {
        let _ = writeln!(
            boxes,
            "{group},{},{},{},{},{},{},{},{},{},{},{}",
            b.count, b.min, b.q1, b.median, b.q3, b.max, b.lower_fence, b.upper_fence,
            b.lower_whisker, b.upper_whisker, b.outlier_count
        );
    }
    files.push(("box.csv", boxes));

    let mut hist = String::from("bin_lo,bin_hi,aae_count,sae_count\n");
    let edges = &report.aae_hist.bin_edges;
    for i in 0..report.aae_hist.counts.len() {
        let _ = writeln!(
            hist,
            "{},{},{},{}",
            edges[i], edges[i + 1], report.aae_hist.counts[i], report.sae_hist.counts[i]
        );
    }
    files.push(("histogram.csv", hist));
    files.push(("fpr.csv", fpr_csv(&[("aae", &report.aae_fpr), ("sae", &report.sae_fpr)])));

    for (name, body) in files {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(io_err(path.clone()))?;
    }
    Ok(())
}

/// `threshold,<name>_fpr,...` rows. All curves must share one grid.
pub fn fpr_csv(curves: &[(&str, &FprCurve)]) -> String {
    let mut out = String::from("threshold");
    for (name, _) in curves {
        let _ = write!(out, ",{name}_fpr");
    }
    out.push('\n');
    let Some((_, first)) = curves.first() else { return out };
    for (i, t) in first.thresholds.iter().enumerate() {
        let _ = write!(out, "{t}");
        for (_, c) in curves {
            debug_assert_eq!(c.thresholds[i], *t);
            let _ = write!(out, ",{}", c.fpr[i]);
        }
        out.push('\n');
    }
    out
}

/// Checks the structural invariants a report must satisfy.
pub fn check_report(report: &DisparityReport) -> Result<(), String> {
    if report.aae_fpr.thresholds != report.sae_fpr.thresholds {
        return Err("FPR curves use different threshold grids".into());
    }
    for curve in [&report.aae_fpr, &report.sae_fpr] {
        if curve.fpr.windows(2).any(|w| w[0] < w[1]) {
            return Err("FPR curve increases with threshold".into());
        }
    }
    for (b, n) in [(&report.aae_box, report.aae_means.count), (&report.sae_box, report.sae_means.count)] {
        if !(b.min <= b.q1 && b.q1 <= b.median && b.median <= b.q3 && b.q3 <= b.max) {
            return Err("box statistics out of order".into());
        }
        if b.count != n {
            return Err("box statistics and means cover different rows".into());
        }
    }
    for (h, n) in [(&report.aae_hist, report.aae_means.count), (&report.sae_hist, report.sae_means.count)] {
        if h.counts.iter().sum::<u64>() != n as u64 || h.counts.len() + 1 != h.bin_edges.len() {
            return Err("histogram counts inconsistent".into());
        }
    }
    Ok(())
}
