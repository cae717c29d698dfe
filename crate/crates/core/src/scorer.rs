//! The scoring interface shared by every backend.

use alloc::boxed::Box;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::corpus::Post;
use crate::error::ScoreError;
use crate::labels::LabelScores;

/// Default token budget, the context limit of the upstream BERT encoder.
pub const DEFAULT_MAX_TOKENS: usize = 512;

/// A six-label toxicity scorer. Implementations are immutable once built
/// and must return identical scores for identical input.
pub trait Scorer: Send + Sync {
    /// Scores one text. Texts that are empty after trimming are rejected.
    fn score(&self, text: &str) -> Result<LabelScores, ScoreError>;

    /// Scores many texts. `result[i]` must be bit-identical to
    /// `score(texts[i])`.
    fn score_batch(&self, texts: &[&str]) -> Result<Vec<LabelScores>, ScoreError> {
        texts
            .iter()
            .enumerate()
            .map(|(index, text)| {
                self.score(text)
                    .map_err(|e| ScoreError::Batch { index, source: Box::new(e) })
            })
            .collect()
    }

    /// Short backend name, e.g. `"reference"` or `"onnx"`.
    fn backend(&self) -> &'static str;
}

impl<S: Scorer + ?Sized> Scorer for Box<S> {
    fn score(&self, text: &str) -> Result<LabelScores, ScoreError> {
        (**self).score(text)
    }

    fn score_batch(&self, texts: &[&str]) -> Result<Vec<LabelScores>, ScoreError> {
        (**self).score_batch(texts)
    }

    fn backend(&self) -> &'static str {
        (**self).backend()
    }
}

impl<S: Scorer + ?Sized> Scorer for alloc::sync::Arc<S> {
    fn score(&self, text: &str) -> Result<LabelScores, ScoreError> {
        (**self).score(text)
    }

    fn score_batch(&self, texts: &[&str]) -> Result<Vec<LabelScores>, ScoreError> {
        (**self).score_batch(texts)
    }

    fn backend(&self) -> &'static str {
        (**self).backend()
    }
}

/// A post together with its six scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredPost {
    pub post: Post,
    pub scores: LabelScores,
}

/// Scores every post with one batch call and zips the results back.
pub fn score_posts(scorer: &dyn Scorer, posts: &[Post]) -> Result<Vec<ScoredPost>, ScoreError> {
    let texts: Vec<&str> = posts.iter().map(Post::text).collect();
    let scores = scorer.score_batch(&texts)?;
    Ok(posts
        .iter()
        .cloned()
        .zip(scores)
        .map(|(post, scores)| ScoredPost { post, scores })
        .collect())
}
