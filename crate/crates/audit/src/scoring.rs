//! Scorer configuration, loading, digests, and golden-fixture checks.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use dialect_audit_core::scorer::DEFAULT_MAX_TOKENS;
use dialect_audit_core::{Label, LabelScores, PerLabel, ReferenceScorer, ScoreError, Scorer};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub const DEFAULT_BATCH_SIZE: usize = 32;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("model file not found: {}", .0.display())]
    MissingModel(PathBuf),
    #[error("tokenizer file not found: {}", .0.display())]
    MissingTokenizer(PathBuf),
    #[error("cannot load model {}: {detail}", .path.display())]
    Corrupt { path: PathBuf, detail: String },
    #[error("cannot load model {}: built without the `onnx` feature", .0.display())]
    BackendUnavailable(PathBuf),
    #[error("invalid scorer configuration: {0}")]
    Config(&'static str),
}

/// Where scores come from: the built-in lexicon scorer or a model file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ModelSource {
    Reference,
    File(PathBuf),
}

impl FromStr for ModelSource {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(if s == "reference" { ModelSource::Reference } else { ModelSource::File(s.into()) })
    }
}

impl fmt::Display for ModelSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelSource::Reference => f.write_str("reference"),
            ModelSource::File(p) => write!(f, "{}", p.display()),
        }
    }
}

impl Serialize for ModelSource {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ModelSource {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Ok(s.parse().unwrap_or_else(|never| match never {}))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScorerConfig {
    pub model: ModelSource,
    /// Tokenizer definition; defaults to `tokenizer.json` next to the model.
    pub tokenizer: Option<PathBuf>,
    pub max_tokens: usize,
    pub batch_size: usize,
}

impl Default for ScorerConfig {
    fn default() -> Self {
        ScorerConfig {
            model: ModelSource::Reference,
            tokenizer: None,
            max_tokens: DEFAULT_MAX_TOKENS,
            batch_size: DEFAULT_BATCH_SIZE,
        }
    }
}

impl ScorerConfig {
    pub fn reference() -> ScorerConfig {
        ScorerConfig::default()
    }

    pub fn tokenizer_path(&self, model: &Path) -> PathBuf {
        self.tokenizer
            .clone()
            .unwrap_or_else(|| model.parent().unwrap_or(Path::new(".")).join("tokenizer.json"))
    }
}

/// A ready scorer plus what is needed to identify it in reports.
pub struct LoadedScorer {
    inner: Box<dyn Scorer>,
    model_digest: String,
    config: ScorerConfig,
}

impl fmt::Debug for LoadedScorer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LoadedScorer")
            .field("backend", &self.inner.backend())
            .field("model_digest", &self.model_digest)
            .finish()
    }
}

impl LoadedScorer {
    /// Hex SHA-256 of the model file, or of the lexicon for the reference
    /// scorer.
    pub fn model_digest(&self) -> &str {
        &self.model_digest
    }

    pub fn config(&self) -> &ScorerConfig {
        &self.config
    }

    /// Digest over everything that can change a score: backend, model
    /// digest, and token budget.
    pub fn config_digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.inner.backend().as_bytes());
        h.update([0]);
        h.update(self.model_digest.as_bytes());
        h.update([0]);
        h.update(self.config.max_tokens.to_le_bytes());
        hex::encode(h.finalize())
    }
}

impl Scorer for LoadedScorer {
    fn score(&self, text: &str) -> Result<LabelScores, ScoreError> {
        self.inner.score(text)
    }

    fn score_batch(&self, texts: &[&str]) -> Result<Vec<LabelScores>, ScoreError> {
        self.inner.score_batch(texts)
    }

    fn backend(&self) -> &'static str {
        self.inner.backend()
    }
}

/// `backend:config-digest`, the provenance tag stored with score tables.
pub fn describe(scorer: &LoadedScorer) -> String {
    format!("{}:{}", scorer.backend(), scorer.config_digest())
}

pub fn sha256_file(path: &Path) -> std::io::Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Digest of the reference lexicon and its parameters.
pub fn reference_digest(scorer: &ReferenceScorer) -> String {
    let mut h = Sha256::new();
    h.update(format!("reference-lexicon-v1 bias={}\n", scorer.bias()));
    for (token, weights) in ReferenceScorer::lexicon() {
        h.update(token.as_bytes());
        for w in weights {
            h.update(format!(" {w}"));
        }
        h.update("\n");
    }
    hex::encode(h.finalize())
}

pub fn load_scorer(config: &ScorerConfig) -> Result<LoadedScorer, LoadError> {
    if config.max_tokens == 0 {
        return Err(LoadError::Config("max_tokens must be at least 1"));
    }
    if config.batch_size == 0 {
        return Err(LoadError::Config("batch_size must be at least 1"));
    }
    match &config.model {
        ModelSource::Reference => {
            let scorer = ReferenceScorer::with_max_tokens(config.max_tokens);
            Ok(LoadedScorer {
                model_digest: reference_digest(&scorer),
                inner: Box::new(scorer),
                config: config.clone(),
            })
        }
        ModelSource::File(path) => {
            if !path.is_file() {
                return Err(LoadError::MissingModel(path.clone()));
            }
            let tokenizer = config.tokenizer_path(path);
            if !tokenizer.is_file() {
                return Err(LoadError::MissingTokenizer(tokenizer));
            }
            let model_digest = sha256_file(path)
                .map_err(|e| LoadError::Corrupt { path: path.clone(), detail: e.to_string() })?;
            let inner = load_onnx(path, &tokenizer, config)?;
            Ok(LoadedScorer { inner, model_digest, config: config.clone() })
        }
    }
}

#[cfg(feature = "onnx")]
fn load_onnx(model: &Path, tokenizer: &Path, config: &ScorerConfig) -> Result<Box<dyn Scorer>, LoadError> {
    Ok(Box::new(crate::onnx::OnnxScorer::load(model, tokenizer, config.max_tokens, config.batch_size)?))
}

#[cfg(not(feature = "onnx"))]
fn load_onnx(model: &Path, _: &Path, _: &ScorerConfig) -> Result<Box<dyn Scorer>, LoadError> {
    Err(LoadError::BackendUnavailable(model.to_path_buf()))
}

/// Stored scores for fixture sentences. Labels set to `null` are unknown
/// and not checked.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenFixtures {
    /// Expected model digest, when known.
    #[serde(default)]
    pub model_sha256: Option<String>,
    pub tolerance: f64,
    pub fixtures: Vec<GoldenFixture>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoldenFixture {
    pub text: String,
    /// Token budget the golden scores were produced with.
    #[serde(default)]
    pub max_tokens: Option<usize>,
    pub scores: PerLabel<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoldenMismatch {
    pub text: String,
    pub label: Label,
    pub expected: f64,
    pub actual: f64,
}

impl GoldenFixtures {
    pub fn load(path: &Path) -> std::io::Result<GoldenFixtures> {
        let bytes = std::fs::read(path)?;
        serde_json::from_slice(&bytes).map_err(std::io::Error::other)
    }

    /// Scores each fixture and returns every label outside tolerance.
    pub fn check(&self, scorer: &dyn Scorer) -> Result<Vec<GoldenMismatch>, ScoreError> {
        let mut mismatches = Vec::new();
        for fixture in &self.fixtures {
            let actual = scorer.score(&fixture.text)?;
            for (label, expected) in fixture.scores.iter() {
                let Some(expected) = *expected else { continue };
                let got = *actual.get(label);
                if (got - expected).abs() > self.tolerance {
                    mismatches.push(GoldenMismatch {
                        text: fixture.text.clone(),
                        label,
                        expected,
                        actual: got,
                    });
                }
            }
        }
        Ok(mismatches)
    }
}
