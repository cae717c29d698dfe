//! Disparity statistics over scored corpora.
//!
//! Conventions used throughout:
//!
//! * Means use Neumaier-compensated summation in input order.
//! * Quartiles interpolate linearly between closest ranks: for sorted
//!   `x[0..n]` and probability `p`, `h = (n - 1) p` and
//!   `q = x[floor h] + (h - floor h) (x[floor h + 1] - x[floor h])`.
//! * Box fences sit 1.5 IQR beyond the quartiles, clamped to `[0, 1]`.
//! * Histogram bins are `[lo, hi)` except the last, which is `[lo, 1]`.
//! * A score is flagged when it is strictly greater than the threshold,
//!   both for verdicts and for false-positive counting. Every scored post
//!   is treated as benign, so every flag counts as a false positive.

use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::DialectGroup;
use crate::error::MetricsError;
use crate::labels::{Label, LabelScores, PerLabel};
use crate::scorer::ScoredPost;

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if libm::fabs(self.sum) >= libm::fabs(x) {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupMeans {
    pub group: DialectGroup,
    pub count: usize,
    pub means: LabelScores,
}

/// Per-label arithmetic mean of a group's scores.
pub fn group_means(scored: &[ScoredPost], group: DialectGroup) -> Result<GroupMeans, MetricsError> {
    means_of(scored.iter().map(|s| &s.scores), group)
}

/// [`group_means`] over bare score rows.
pub fn means_of<'a>(
    scores: impl IntoIterator<Item = &'a LabelScores>,
    group: DialectGroup,
) -> Result<GroupMeans, MetricsError> {
    let mut sums = [CompensatedSum::default(); 6];
    let mut count = 0usize;
    for row in scores {
        for (sum, value) in sums.iter_mut().zip(row.to_array()) {
            sum.add(value);
        }
        count += 1;
    }
    if count == 0 {
        return Err(MetricsError::EmptyInput("group_means"));
    }
    let n = count as f64;
    Ok(GroupMeans {
        group,
        count,
        means: PerLabel::from_fn(|l| sums[l.index()].total() / n),
    })
}

/// An AAE-over-SAE mean ratio, or a marker when the SAE mean is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ratio {
    Defined(f64),
    Undefined,
}

impl Ratio {
    pub fn value(self) -> Option<f64> {
        match self {
            Ratio::Defined(v) => Some(v),
            Ratio::Undefined => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisparityRatios {
    pub ratios: PerLabel<Ratio>,
}

impl DisparityRatios {
    pub fn get(&self, label: Label) -> Ratio {
        *self.ratios.get(label)
    }
}

pub fn disparity_ratios(aae: &GroupMeans, sae: &GroupMeans) -> Result<DisparityRatios, MetricsError> {
    for (means, expected) in [(aae, DialectGroup::Aae), (sae, DialectGroup::Sae)] {
        if means.group != expected {
            return Err(MetricsError::GroupMismatch {
                expected: expected.as_str(),
                found: means.group.as_str(),
            });
        }
    }
    let ratios = PerLabel::from_fn(|l| {
        let denominator = *sae.means.get(l);
        if denominator == 0.0 {
            Ratio::Undefined
        } else {
            Ratio::Defined(*aae.means.get(l) / denominator)
        }
    });
    Ok(DisparityRatios { ratios })
}

fn check_probabilities(what: &'static str, values: &[f64]) -> Result<(), MetricsError> {
    match values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        Some(&value) => Err(MetricsError::NotAProbability { what, value }),
        None => Ok(()),
    }
}

/// Linear-interpolation quantile of an ascending, non-empty slice.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p;
    let lo = libm::floor(h) as usize;
    if lo + 1 >= sorted.len() {
        return sorted[sorted.len() - 1];
    }
    sorted[lo] + (h - lo as f64) * (sorted[lo + 1] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub lower_fence: f64,
    pub upper_fence: f64,
    /// Most extreme data points still inside the fences.
    pub lower_whisker: f64,
    pub upper_whisker: f64,
    pub outlier_count: usize,
}

pub fn box_stats(scores: &[f64]) -> Result<BoxStats, MetricsError> {
    if scores.is_empty() {
        return Err(MetricsError::EmptyInput("box_stats"));
    }
    check_probabilities("box_stats", scores)?;
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let median = quantile_sorted(&sorted, 0.5);
    let q3 = quantile_sorted(&sorted, 0.75);
    let iqr = q3 - q1;
    let lower_fence = (q1 - 1.5 * iqr).clamp(0.0, 1.0);
    let upper_fence = (q3 + 1.5 * iqr).clamp(0.0, 1.0);
    let inside = |x: &&f64| **x >= lower_fence && **x <= upper_fence;
    let outlier_count = sorted.len() - sorted.iter().filter(inside).count();
    // the quartiles always lie inside the fences, so both whiskers exist
    let lower_whisker = *sorted.iter().find(inside).unwrap_or(&q1);
    let upper_whisker = *sorted.iter().rev().find(inside).unwrap_or(&q3);
    Ok(BoxStats {
        count: sorted.len(),
        min: sorted[0],
        q1,
        median,
        q3,
        max: sorted[sorted.len() - 1],
        lower_fence,
        upper_fence,
        lower_whisker,
        upper_whisker,
        outlier_count,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramSeries {
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
}

/// `bin_count + 1` equally spaced edges from 0 to 1, both ends exact.
pub fn bin_edges(bin_count: usize) -> Vec<f64> {
    (0..=bin_count).map(|i| i as f64 / bin_count as f64).collect()
}

pub fn histogram(scores: &[f64], bin_count: usize) -> Result<HistogramSeries, MetricsError> {
    if bin_count == 0 {
        return Err(MetricsError::ZeroBins);
    }
    check_probabilities("histogram", scores)?;
    let edges = bin_edges(bin_count);
    let mut counts = alloc::vec![0u64; bin_count];
    for &s in scores {
        // start from the arithmetic guess, then settle against the stored
        // edges so membership agrees with `edges[i] <= s < edges[i + 1]`
        let mut i = (libm::floor(s * bin_count as f64) as usize).min(bin_count - 1);
        while i > 0 && s < edges[i] {
            i -= 1;
        }
        while i + 1 < bin_count && s >= edges[i + 1] {
            i += 1;
        }
        counts[i] += 1;
    }
    Ok(HistogramSeries { bin_edges: edges, counts })
}

/// An evenly spaced threshold grid `start, start + step, ..., stop`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for ThresholdGrid {
    fn default() -> Self {
        ThresholdGrid { start: 0.0, stop: 1.0, step: 0.01 }
    }
}

impl ThresholdGrid {
    // negated comparisons also reject NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn new(start: f64, stop: f64, step: f64) -> Result<ThresholdGrid, MetricsError> {
        if !(step > 0.0) {
            return Err(MetricsError::Grid("step must be positive"));
        }
        if !(start < stop) {
            return Err(MetricsError::Grid("start must be below stop"));
        }
        if !(0.0..=1.0).contains(&start) || !(0.0..=1.0).contains(&stop) {
            return Err(MetricsError::Grid("start and stop must lie in [0, 1]"));
        }
        Ok(ThresholdGrid { start, stop, step })
    }

    /// Grid points. When the step divides the span (to within 1e-9 steps)
    /// the points are computed as `start + span * i / n`, which makes the
    /// endpoints exact and `0:1:0.01` yield the correctly rounded `i / 100`.
    pub fn points(&self) -> Vec<f64> {
        let span = self.stop - self.start;
        let ratio = span / self.step;
        let n = libm::round(ratio);
        if libm::fabs(ratio - n) < 1e-9 {
            let n = n as usize;
            (0..=n).map(|i| self.start + span * i as f64 / n as f64).collect()
        } else {
            let n = libm::floor(ratio) as usize;
            (0..=n).map(|i| self.start + self.step * i as f64).collect()
        }
    }
}

impl FromStr for ThresholdGrid {
    type Err = MetricsError;

    /// Parses `start:stop:step`, e.g. `0:1:0.01`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.split(':').map(|p| p.trim().parse::<f64>());
        match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(Ok(start)), Some(Ok(stop)), Some(Ok(step)), None) => {
                ThresholdGrid::new(start, stop, step)
            }
            _ => Err(MetricsError::Grid("expected start:stop:step")),
        }
    }
}

impl fmt::Display for ThresholdGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FprCurve {
    pub thresholds: Vec<f64>,
    pub fpr: Vec<f64>,
}

/// Fraction of scores strictly above each threshold.
#[allow(clippy::neg_cmp_op_on_partial_ord)]
pub fn fpr_curve(scores: &[f64], thresholds: &[f64]) -> Result<FprCurve, MetricsError> {
    if scores.is_empty() {
        return Err(MetricsError::EmptyInput("fpr_curve"));
    }
    check_probabilities("fpr_curve score", scores)?;
    check_probabilities("fpr_curve threshold", thresholds)?;
    if thresholds.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(MetricsError::Grid("thresholds must be strictly increasing"));
    }
    let mut sorted = scores.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let fpr = thresholds
        .iter()
        .map(|&t| {
            let flagged = n - sorted.partition_point(|&s| s <= t);
            flagged as f64 / n as f64
        })
        .collect();
    Ok(FprCurve { thresholds: thresholds.to_vec(), fpr })
}

/// A human-chosen cutoff in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ThresholdPolicy(f64);

impl ThresholdPolicy {
    pub fn new(threshold: f64) -> Result<ThresholdPolicy, MetricsError> {
        if (0.0..=1.0).contains(&threshold) {
            Ok(ThresholdPolicy(threshold))
        } else {
            Err(MetricsError::NotAProbability { what: "threshold", value: threshold })
        }
    }

    pub fn threshold(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for ThresholdPolicy {
    type Error = MetricsError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        ThresholdPolicy::new(value)
    }
}

impl From<ThresholdPolicy> for f64 {
    fn from(policy: ThresholdPolicy) -> f64 {
        policy.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Toxic,
    NotToxic,
}

impl Verdict {
    /// Verdict for a bare toxicity score.
    pub fn for_score(toxicity: f64, policy: ThresholdPolicy) -> Verdict {
        if toxicity > policy.threshold() {
            Verdict::Toxic
        } else {
            Verdict::NotToxic
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Toxic => "TOXIC",
            Verdict::NotToxic => "NOT_TOXIC",
        })
    }
}

/// TOXIC iff the toxicity label is strictly above the threshold. The other
/// five labels never participate.
pub fn verdict(scores: &LabelScores, policy: ThresholdPolicy) -> Verdict {
    Verdict::for_score(scores.toxicity, policy)
}

/// Half-open interval `[lower, upper)` of thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlipInterval {
    pub lower: f64,
    pub upper: f64,
}

impl FlipInterval {
    pub fn contains(&self, threshold: f64) -> bool {
        self.lower <= threshold && threshold < self.upper
    }
}

/// Thresholds at which two toxicity scores get different verdicts:
/// `[min, max)`, or `None` when the scores are equal.
pub fn flip_interval(score_a: f64, score_b: f64) -> Option<FlipInterval> {
    if score_a == score_b {
        return None;
    }
    Some(FlipInterval { lower: score_a.min(score_b), upper: score_a.max(score_b) })
}
