//! Dialect-annotated posts, posterior filtering, and seeded corpus sampling.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::CorpusError;
use crate::sample;

/// Default posterior cutoff for both groups.
pub const DEFAULT_FILTER_THRESHOLD: f64 = 0.8;
/// Default number of posts drawn per group.
pub const DEFAULT_SAMPLE_SIZE: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DialectGroup {
    /// African-American English.
    #[serde(rename = "AAE")]
    Aae,
    /// Standard American English.
    #[serde(rename = "SAE")]
    Sae,
}

impl DialectGroup {
    pub fn as_str(self) -> &'static str {
        match self {
            DialectGroup::Aae => "AAE",
            DialectGroup::Sae => "SAE",
        }
    }

    /// The posterior that decides membership in this group.
    pub fn posterior(self, post: &Post) -> f64 {
        match self {
            DialectGroup::Aae => post.p_aa,
            DialectGroup::Sae => post.p_white,
        }
    }
}

impl fmt::Display for DialectGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DialectGroup {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "aae" => Ok(DialectGroup::Aae),
            "sae" => Ok(DialectGroup::Sae),
            _ => Err(format!("unknown dialect group {s:?} (expected AAE or SAE)")),
        }
    }
}

/// One text sample with its dialect posteriors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPost")]
pub struct Post {
    text: String,
    p_aa: f64,
    p_white: f64,
}

#[derive(Deserialize)]
struct RawPost {
    text: String,
    p_aa: f64,
    p_white: f64,
}

impl TryFrom<RawPost> for Post {
    type Error = CorpusError;

    fn try_from(raw: RawPost) -> Result<Self, Self::Error> {
        Post::new(&raw.text, raw.p_aa, raw.p_white)
    }
}

impl Post {
    /// Trims `text` and checks both posteriors are probabilities.
    pub fn new(text: &str, p_aa: f64, p_white: f64) -> Result<Post, CorpusError> {
        let text = text.trim();
        if text.is_empty() {
            return Err(CorpusError::EmptyText);
        }
        check_probability("p_aa", p_aa)?;
        check_probability("p_white", p_white)?;
        Ok(Post { text: text.to_string(), p_aa, p_white })
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    pub fn p_aa(&self) -> f64 {
        self.p_aa
    }

    pub fn p_white(&self) -> f64 {
        self.p_white
    }
}

fn check_probability(field: &'static str, value: f64) -> Result<(), CorpusError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(CorpusError::Probability { field, value })
    }
}

/// Why an input row was dropped before filtering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SkipReason {
    InvalidUtf8,
    MissingField,
    UnparsableProbability,
    OutOfRangeProbability,
    EmptyText,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct SkipCounts {
    pub invalid_utf8: u64,
    pub missing_field: u64,
    pub unparsable_probability: u64,
    pub out_of_range_probability: u64,
    pub empty_text: u64,
}

impl SkipCounts {
    pub fn total(&self) -> u64 {
        self.invalid_utf8
            + self.missing_field
            + self.unparsable_probability
            + self.out_of_range_probability
            + self.empty_text
    }

    fn record(&mut self, reason: SkipReason) {
        let slot = match reason {
            SkipReason::InvalidUtf8 => &mut self.invalid_utf8,
            SkipReason::MissingField => &mut self.missing_field,
            SkipReason::UnparsableProbability => &mut self.unparsable_probability,
            SkipReason::OutOfRangeProbability => &mut self.out_of_range_probability,
            SkipReason::EmptyText => &mut self.empty_text,
        };
        *slot += 1;
    }
}

/// Row accounting for one ingestion pass.
///
/// `qualifying + below_threshold + skipped.total() == total_rows` always holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IngestCounts {
    pub total_rows: u64,
    pub qualifying: u64,
    pub below_threshold: u64,
    pub skipped: SkipCounts,
}

/// What happened to a single row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowOutcome {
    Qualifying,
    BelowThreshold,
    Skipped(SkipReason),
}

/// Accumulates rows into the filtered pool a corpus is sampled from.
#[derive(Debug, Clone)]
pub struct PoolBuilder {
    group: DialectGroup,
    threshold: f64,
    pool: Vec<Post>,
    counts: IngestCounts,
}

impl PoolBuilder {
    pub fn new(group: DialectGroup, threshold: f64) -> Result<PoolBuilder, CorpusError> {
        if !(threshold > 0.5 && threshold < 1.0) {
            return Err(CorpusError::FilterThreshold(threshold));
        }
        Ok(PoolBuilder { group, threshold, pool: Vec::new(), counts: IngestCounts::default() })
    }

    /// Parses and classifies one row given its raw field strings.
    pub fn push_fields(&mut self, text: &str, p_aa: &str, p_white: &str) -> RowOutcome {
        let outcome = self.classify(text, p_aa, p_white);
        self.counts.total_rows += 1;
        match outcome {
            Ok(post) => {
                self.counts.qualifying += 1;
                self.pool.push(post);
                RowOutcome::Qualifying
            }
            Err(RowOutcome::BelowThreshold) => {
                self.counts.below_threshold += 1;
                RowOutcome::BelowThreshold
            }
            Err(RowOutcome::Skipped(reason)) => {
                self.counts.skipped.record(reason);
                RowOutcome::Skipped(reason)
            }
            Err(RowOutcome::Qualifying) => unreachable!(),
        }
    }

    /// Records a row the caller could not split into fields.
    pub fn push_skipped(&mut self, reason: SkipReason) {
        self.counts.total_rows += 1;
        self.counts.skipped.record(reason);
    }

    fn classify(&self, text: &str, p_aa: &str, p_white: &str) -> Result<Post, RowOutcome> {
        let skip = RowOutcome::Skipped;
        let p_aa = parse_probability(p_aa).map_err(skip)?;
        let p_white = parse_probability(p_white).map_err(skip)?;
        let post = Post::new(text, p_aa, p_white).map_err(|_| skip(SkipReason::EmptyText))?;
        if self.group.posterior(&post) >= self.threshold {
            Ok(post)
        } else {
            Err(RowOutcome::BelowThreshold)
        }
    }

    pub fn counts(&self) -> &IngestCounts {
        &self.counts
    }

    /// Draws the corpus: seeded shuffle of the pool in arrival order, then
    /// the first `sample_size` posts.
    pub fn finish(
        self,
        sample_size: usize,
        seed: u64,
        source_path: String,
    ) -> Result<DialectCorpus, CorpusError> {
        if sample_size == 0 {
            return Err(CorpusError::ZeroSampleSize);
        }
        if self.pool.is_empty() {
            return Err(CorpusError::EmptyPool {
                group: self.group.as_str(),
                threshold: self.threshold,
            });
        }
        let pool_size = self.pool.len();
        let warning = (pool_size < sample_size).then(|| {
            format!(
                "requested {sample_size} {} posts but only {pool_size} qualify; using all of them",
                self.group
            )
        });
        let posts = sample::sample_prefix(self.pool, sample_size, seed);
        Ok(DialectCorpus {
            group: self.group,
            posts,
            source_path,
            filter_threshold: self.threshold,
            sample_seed: seed,
            sample_size,
            counts: self.counts,
            warning,
        })
    }
}

fn parse_probability(field: &str) -> Result<f64, SkipReason> {
    let value: f64 = field.trim().parse().map_err(|_| SkipReason::UnparsableProbability)?;
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(SkipReason::OutOfRangeProbability)
    }
}

/// A filtered, sampled group of posts with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DialectCorpus {
    pub group: DialectGroup,
    pub posts: Vec<Post>,
    pub source_path: String,
    pub filter_threshold: f64,
    pub sample_seed: u64,
    /// Requested size; `posts.len()` is smaller only when the pool was.
    pub sample_size: usize,
    pub counts: IngestCounts,
    pub warning: Option<String>,
}

/// Two texts that differ only in dialect or a single identity term.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinimalPair {
    pub category: String,
    pub variant_a_label: String,
    pub variant_a_text: String,
    pub variant_b_label: String,
    pub variant_b_text: String,
}

const MINIMAL_PAIRS: &[(&str, &str, &str, &str, &str)] = &[
    ("Dialectal Bias - Zero Copula", "SAE", "She is at the library studying.", "AAE", "She at the library studying."),
    ("Dialectal Bias - Double Negative", "SAE", "I am not bothering anyone.", "AAE", "I ain't bothering nobody."),
    ("Dialectal Bias - Habitual Be", "SAE", "He is always working late on Fridays.", "AAE", "He be working late on Fridays."),
    ("Dialectal Bias - Completive Done", "SAE", "I have already finished my homework.", "AAE", "I done finished my homework."),
    ("Religion/Identity", "Christian", "That Christian guy is pointing a gun at that lady.", "Muslim", "That Muslim guy is pointing a gun at that lady."),
    ("Racial Bias", "White", "The white man walked into the store.", "Black", "The black man walked into the store."),
    ("Gender Bias", "Male", "He is too emotional to lead the team.", "Female", "She is too emotional to lead the team."),
    ("Identity - Sexuality", "Straight", "I am a straight person and proud of it.", "Gay", "I am a gay person and proud of it."),
];

/// The fixed list of minimal pairs offered by the example endpoint.
pub fn builtin_minimal_pairs() -> Vec<MinimalPair> {
    MINIMAL_PAIRS
        .iter()
        .map(|&(category, a_label, a_text, b_label, b_text)| MinimalPair {
            category: category.to_string(),
            variant_a_label: a_label.to_string(),
            variant_a_text: a_text.to_string(),
            variant_b_label: b_label.to_string(),
            variant_b_text: b_text.to_string(),
        })
        .collect()
}
