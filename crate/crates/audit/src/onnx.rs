//! Transformer backend: an exported sequence-classification model run with
//! tract, fed by a HuggingFace `tokenizer.json`.
//!
//! The model must take some subset of `input_ids`, `attention_mask` and
//! `token_type_ids` (all `i64`, shape `[1, sequence]`) and return six
//! logits as its first output, in the canonical label order. Each logit
//! goes through its own sigmoid.

use std::path::Path;
use std::sync::Arc;

use dialect_audit_core::{LabelScores, ScoreError, Scorer};
use rayon::prelude::*;
use tokenizers::{Tokenizer, TruncationParams};
use tract_onnx::prelude::*;

use crate::scoring::LoadError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum InputKind {
    Ids,
    Mask,
    TypeIds,
}

pub struct OnnxScorer {
    plan: Arc<TypedRunnableModel>,
    inputs: Vec<InputKind>,
    tokenizer: Tokenizer,
    batch_size: usize,
}

impl OnnxScorer {
    pub fn load(
        model_path: &Path,
        tokenizer_path: &Path,
        max_tokens: usize,
        batch_size: usize,
    ) -> Result<OnnxScorer, LoadError> {
        let corrupt = |path: &Path| {
            let path = path.to_path_buf();
            move |e: &dyn std::fmt::Display| LoadError::Corrupt { path: path.clone(), detail: e.to_string() }
        };
        let model_err = corrupt(model_path);
        let mut model = tract_onnx::onnx()
            .model_for_path(model_path)
            .map_err(|e| model_err(&format!("{e:#}")))?;
        let mut inputs = Vec::new();
        for outlet in model.input_outlets().map_err(|e| model_err(&e))? {
            let name = &model.node(outlet.node).name;
            inputs.push(match name.as_str() {
                "input_ids" => InputKind::Ids,
                "attention_mask" => InputKind::Mask,
                "token_type_ids" => InputKind::TypeIds,
                other => return Err(model_err(&format!("unsupported model input {other:?}"))),
            });
        }
        // Batch of one, symbolic sequence length.
        let seq = model.sym("S");
        for i in 0..inputs.len() {
            model
                .set_input_fact(i, i64::fact([1.to_dim(), seq.to_dim()]).into())
                .map_err(|e| model_err(&e))?;
        }
        let plan = model
            .into_optimized()
            .and_then(|m| m.into_runnable())
            .map_err(|e| model_err(&format!("{e:#}")))?;

        let tok_err = corrupt(tokenizer_path);
        let mut tokenizer = Tokenizer::from_file(tokenizer_path).map_err(|e| tok_err(&e))?;
        tokenizer
            .with_truncation(Some(TruncationParams { max_length: max_tokens, ..Default::default() }))
            .map_err(|e| tok_err(&e))?;
        tokenizer.with_padding(None);
        Ok(OnnxScorer { plan, inputs, tokenizer, batch_size })
    }

    fn logits(&self, text: &str) -> TractResult<[f64; 6]> {
        let encoding = self.tokenizer.encode(text, true).map_err(|e| TractError::msg(e.to_string()))?;
        let n = encoding.get_ids().len();
        let column = |values: &[u32]| -> TractResult<TValue> {
            let data: Vec<i64> = values.iter().map(|&v| v as i64).collect();
            Ok(tract_ndarray::Array2::from_shape_vec((1, n), data)?.into_tvalue())
        };
        let mut feed = TVec::new();
        for kind in &self.inputs {
            feed.push(match kind {
                InputKind::Ids => column(encoding.get_ids())?,
                InputKind::Mask => column(encoding.get_attention_mask())?,
                InputKind::TypeIds => column(encoding.get_type_ids())?,
            });
        }
        let outputs = self.plan.run(feed)?;
        let view = outputs[0].to_plain_array_view::<f32>()?;
        let values: Vec<f32> = view.iter().copied().collect();
        let logits: [f32; 6] = values
            .as_slice()
            .try_into()
            .map_err(|_| TractError::msg(format!("expected 6 logits, got shape {:?}", view.shape())))?;
        Ok(logits.map(f64::from))
    }
}

impl Scorer for OnnxScorer {
    fn score(&self, text: &str) -> Result<LabelScores, ScoreError> {
        if text.trim().is_empty() {
            return Err(ScoreError::EmptyText);
        }
        let logits = self.logits(text).map_err(|e| ScoreError::Backend(format!("{e:#}")))?;
        let scores = LabelScores::from_logits(logits);
        scores.validate()?;
        Ok(scores)
    }

    /// Texts are run one at a time (no padding), spread across threads, so
    /// every result is bit-identical to the corresponding single call.
    fn score_batch(&self, texts: &[&str]) -> Result<Vec<LabelScores>, ScoreError> {
        let results: Vec<Result<LabelScores, ScoreError>> = texts
            .par_iter()
            .with_min_len(self.batch_size)
            .map(|t| self.score(t))
            .collect();
        results
            .into_iter()
            .enumerate()
            .map(|(index, r)| r.map_err(|e| ScoreError::Batch { index, source: Box::new(e) }))
            .collect()
    }

    fn backend(&self) -> &'static str {
        "onnx"
    }
}
