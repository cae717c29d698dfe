//! The six toxicity labels and per-label containers.

use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::ScoreError;

/// One of the six independent outputs of the toxicity classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Label {
    Toxicity,
    SevereToxicity,
    Obscene,
    Threat,
    Insult,
    IdentityAttack,
}

impl Label {
    /// Canonical order, matching the classifier's output head.
    pub const ALL: [Label; 6] = [
        Label::Toxicity,
        Label::SevereToxicity,
        Label::Obscene,
        Label::Threat,
        Label::Insult,
        Label::IdentityAttack,
    ];

    /// Machine name used in JSON keys and CSV headers.
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Toxicity => "toxicity",
            Label::SevereToxicity => "severe_toxicity",
            Label::Obscene => "obscene",
            Label::Threat => "threat",
            Label::Insult => "insult",
            Label::IdentityAttack => "identity_attack",
        }
    }

    /// Human-facing name used in rendered report tables.
    pub fn display_name(self) -> &'static str {
        match self {
            Label::Toxicity => "Toxicity",
            Label::SevereToxicity => "Severe toxicity",
            Label::Obscene => "Obscene",
            Label::Threat => "Threat",
            Label::Insult => "Insult",
            Label::IdentityAttack => "Identity hate",
        }
    }

    pub fn parse(name: &str) -> Option<Label> {
        Label::ALL.into_iter().find(|l| l.as_str() == name)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A value for each of the six labels, serialized as a flat object keyed by
/// canonical label name.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PerLabel<T> {
    pub toxicity: T,
    pub severe_toxicity: T,
    pub obscene: T,
    pub threat: T,
    pub insult: T,
    pub identity_attack: T,
}

impl<T> PerLabel<T> {
    pub fn from_fn(mut f: impl FnMut(Label) -> T) -> Self {
        PerLabel {
            toxicity: f(Label::Toxicity),
            severe_toxicity: f(Label::SevereToxicity),
            obscene: f(Label::Obscene),
            threat: f(Label::Threat),
            insult: f(Label::Insult),
            identity_attack: f(Label::IdentityAttack),
        }
    }

    pub fn get(&self, label: Label) -> &T {
        match label {
            Label::Toxicity => &self.toxicity,
            Label::SevereToxicity => &self.severe_toxicity,
            Label::Obscene => &self.obscene,
            Label::Threat => &self.threat,
            Label::Insult => &self.insult,
            Label::IdentityAttack => &self.identity_attack,
        }
    }

    pub fn get_mut(&mut self, label: Label) -> &mut T {
        match label {
            Label::Toxicity => &mut self.toxicity,
            Label::SevereToxicity => &mut self.severe_toxicity,
            Label::Obscene => &mut self.obscene,
            Label::Threat => &mut self.threat,
            Label::Insult => &mut self.insult,
            Label::IdentityAttack => &mut self.identity_attack,
        }
    }

    pub fn map<U>(&self, mut f: impl FnMut(Label, &T) -> U) -> PerLabel<U> {
        PerLabel::from_fn(|l| f(l, self.get(l)))
    }

    /// Pairs of `(label, value)` in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (Label, &T)> + '_ {
        Label::ALL.into_iter().map(move |l| (l, self.get(l)))
    }
}

/// Six independent per-label probabilities. There is no sum-to-one
/// constraint; each label comes from its own sigmoid.
pub type LabelScores = PerLabel<f64>;

impl PerLabel<f64> {
    /// Builds scores from the classifier's output order, rejecting anything
    /// outside `[0, 1]` or non-finite.
    pub fn from_array(values: [f64; 6]) -> Result<LabelScores, ScoreError> {
        let scores = PerLabel::from_fn(|l| values[l.index()]);
        scores.validate()?;
        Ok(scores)
    }

    pub fn to_array(&self) -> [f64; 6] {
        Label::ALL.map(|l| *self.get(l))
    }

    pub fn validate(&self) -> Result<(), ScoreError> {
        for (label, &value) in self.iter() {
            if !(0.0..=1.0).contains(&value) {
                return Err(ScoreError::OutOfRange { label, value });
            }
        }
        Ok(())
    }

    /// Applies the logistic function to six raw logits.
    pub fn from_logits(logits: [f64; 6]) -> LabelScores {
        PerLabel::from_fn(|l| logistic(logits[l.index()]))
    }
}

/// `1 / (1 + e^-x)`, returning a value in `[0, 1]` for every finite input.
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + libm::exp(-x))
    } else {
        let e = libm::exp(x);
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_matches_index() {
        for (i, l) in Label::ALL.into_iter().enumerate() {
            assert_eq!(l.index(), i);
            assert_eq!(Label::parse(l.as_str()), Some(l));
        }
        assert_eq!(Label::IdentityAttack.display_name(), "Identity hate");
        assert_eq!(Label::SevereToxicity.display_name(), "Severe toxicity");
    }

    #[test]
    fn out_of_range_scores_rejected() {
        assert!(LabelScores::from_array([0.0, 0.1, 0.2, 0.3, 0.4, 1.0]).is_ok());
        assert!(LabelScores::from_array([0.0, 0.1, 0.2, 1.3, 0.4, 1.0]).is_err());
        assert!(LabelScores::from_array([f64::NAN, 0.1, 0.2, 0.3, 0.4, 1.0]).is_err());
    }

    #[test]
    fn logistic_is_bounded_and_symmetric() {
        assert_eq!(logistic(0.0), 0.5);
        assert!((logistic(3.0) + logistic(-3.0) - 1.0).abs() < 1e-15);
        assert_eq!(logistic(1e6), 1.0);
        assert_eq!(logistic(-1e6), 0.0);
    }
}
