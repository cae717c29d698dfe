//! Deterministic lexicon scorer.
//!
//! Each label has a weighted lexicon. A text is lowercased and split into
//! tokens (runs of alphanumerics and apostrophes), truncated to
//! `max_tokens`, and every token occurrence found in the lexicon adds its
//! weight to a per-label logit:
//!
//! ```text
//! score(label) = logistic(bias + sum of weight(label, token) over tokens)
//! ```
//!
//! With no lexicon hit every label sits at the floor `logistic(bias)`.
//! The default bias is -4.
//!
//! The lexicon is a toy. Besides profanity, threat and insult terms it
//! gives small positive weights to a few identity terms and dialect
//! markers, the pattern that biased production classifiers are known to
//! exhibit, so a hermetic audit run has a disparity to find.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::ScoreError;
use crate::labels::{logistic, LabelScores, PerLabel};
use crate::scorer::{Scorer, DEFAULT_MAX_TOKENS};

pub const DEFAULT_BIAS: f64 = -4.0;

/// `(token, [toxicity, severe_toxicity, obscene, threat, insult, identity_attack])`,
/// sorted by token.
const LEXICON: &[(&str, [f64; 6])] = &[
    ("ain't", [0.9, 0.0, 0.3, 0.0, 0.4, 0.3]),
    ("ass", [2.5, 0.8, 3.5, 0.0, 2.0, 0.0]),
    ("bae", [0.6, 0.0, 0.4, 0.0, 0.2, 0.2]),
    ("bitch", [3.5, 2.0, 3.5, 0.0, 3.5, 0.5]),
    ("black", [0.6, 0.0, 0.0, 0.0, 0.2, 1.5]),
    ("christian", [0.75, 0.0, 0.0, 0.0, 0.0, 0.3]),
    ("damn", [1.5, 0.2, 1.5, 0.0, 0.5, 0.0]),
    ("dat", [0.7, 0.0, 0.3, 0.0, 0.3, 0.3]),
    ("die", [2.0, 0.8, 0.0, 2.5, 0.5, 0.0]),
    ("dumb", [2.0, 0.2, 0.3, 0.0, 3.0, 0.0]),
    ("finna", [0.8, 0.0, 0.2, 0.3, 0.2, 0.2]),
    ("fuck", [4.0, 3.5, 5.0, 0.5, 2.5, 0.0]),
    ("fucking", [4.0, 3.5, 5.0, 0.5, 2.5, 0.0]),
    ("gay", [1.6, 0.3, 0.8, 0.0, 1.0, 2.5]),
    ("gun", [3.0, 0.5, 0.0, 2.0, 0.0, 0.0]),
    ("hate", [2.0, 0.3, 0.0, 0.5, 1.0, 0.8]),
    ("hell", [1.2, 0.0, 1.0, 0.0, 0.3, 0.0]),
    ("hella", [0.5, 0.0, 0.4, 0.0, 0.1, 0.1]),
    ("hurt", [1.0, 0.0, 0.0, 2.0, 0.2, 0.0]),
    ("idiot", [3.0, 0.5, 0.5, 0.0, 4.5, 0.0]),
    ("jew", [1.5, 0.3, 0.0, 0.0, 0.5, 2.5]),
    ("kill", [2.5, 2.0, 0.0, 4.0, 0.5, 0.0]),
    ("loser", [2.0, 0.1, 0.0, 0.0, 3.5, 0.0]),
    ("muslim", [2.2, 0.2, 0.0, 0.3, 0.3, 2.0]),
    ("pointing", [1.0, 0.0, 0.0, 0.8, 0.0, 0.0]),
    ("shit", [3.0, 1.5, 4.5, 0.0, 1.5, 0.0]),
    ("shoot", [2.5, 1.0, 0.0, 3.5, 0.0, 0.0]),
    ("smh", [0.6, 0.0, 0.2, 0.0, 0.4, 0.0]),
    ("stupid", [2.5, 0.2, 0.3, 0.0, 3.5, 0.0]),
    ("trash", [1.5, 0.0, 0.3, 0.0, 2.0, 0.0]),
    ("ugly", [2.0, 0.1, 0.3, 0.0, 3.0, 0.2]),
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceScorer {
    bias: f64,
    max_tokens: usize,
}

impl Default for ReferenceScorer {
    fn default() -> Self {
        ReferenceScorer { bias: DEFAULT_BIAS, max_tokens: DEFAULT_MAX_TOKENS }
    }
}

impl ReferenceScorer {
    pub fn new(bias: f64, max_tokens: usize) -> ReferenceScorer {
        assert!(bias.is_finite(), "bias must be finite");
        assert!(max_tokens >= 1, "max_tokens must be at least 1");
        ReferenceScorer { bias, max_tokens }
    }

    pub fn with_max_tokens(max_tokens: usize) -> ReferenceScorer {
        ReferenceScorer::new(DEFAULT_BIAS, max_tokens)
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn max_tokens(&self) -> usize {
        self.max_tokens
    }

    /// The score every label takes when no token is in the lexicon.
    pub fn floor(&self) -> f64 {
        logistic(self.bias)
    }

    /// The full weighted lexicon, sorted by token.
    pub fn lexicon() -> &'static [(&'static str, [f64; 6])] {
        LEXICON
    }

    fn weights(token: &str) -> Option<&'static [f64; 6]> {
        LEXICON
            .binary_search_by(|(t, _)| (*t).cmp(token))
            .ok()
            .map(|i| &LEXICON[i].1)
    }
}

/// Lowercased tokens: maximal runs of alphanumerics and apostrophes, with
/// typographic apostrophes folded to `'` and edge apostrophes stripped.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut current = String::new();
    let mut flush = |current: &mut String| {
        let token = current.trim_matches('\'');
        if !token.is_empty() {
            tokens.push(String::from(token));
        }
        current.clear();
    };
    for c in text.chars() {
        let c = if c == '\u{2019}' { '\'' } else { c };
        if c.is_alphanumeric() || c == '\'' {
            current.extend(c.to_lowercase());
        } else {
            flush(&mut current);
        }
    }
    flush(&mut current);
    tokens
}

impl Scorer for ReferenceScorer {
    fn score(&self, text: &str) -> Result<LabelScores, ScoreError> {
        if text.trim().is_empty() {
            return Err(ScoreError::EmptyText);
        }
        let mut logits = [self.bias; 6];
        for token in tokenize(text).iter().take(self.max_tokens) {
            if let Some(w) = Self::weights(token) {
                for (logit, weight) in logits.iter_mut().zip(w) {
                    *logit += weight;
                }
            }
        }
        Ok(PerLabel::from_logits(logits))
    }

    fn backend(&self) -> &'static str {
        "reference"
    }
}
