//! Allocation-only core of the dialect bias audit.
//!
//! Everything here is pure computation over in-memory values: validated
//! posts and corpus sampling, the six-label score types, the lexicon
//! reference scorer, and the disparity metrics (means, ratios, box
//! statistics, histograms, false-positive-rate curves, verdicts). File
//! formats, the transformer backend, the HTTP service, and the CLI live in
//! the `dialect-audit` crate.

#![no_std]

extern crate alloc;

pub mod corpus;
pub mod error;
pub mod labels;
pub mod metrics;
pub mod reference;
pub mod sample;
pub mod scorer;

pub use corpus::{
    builtin_minimal_pairs, DialectCorpus, DialectGroup, IngestCounts, MinimalPair, Post,
    PoolBuilder, RowOutcome,
};
pub use error::{CorpusError, MetricsError, ScoreError};
pub use labels::{Label, LabelScores, PerLabel};
pub use metrics::{
    box_stats, disparity_ratios, flip_interval, fpr_curve, group_means, histogram, verdict,
    BoxStats, DisparityRatios, FlipInterval, FprCurve, GroupMeans, HistogramSeries, Ratio,
    ThresholdGrid, ThresholdPolicy, Verdict,
};
pub use reference::ReferenceScorer;
pub use scorer::{ScoredPost, Scorer};
