use serde::{Deserialize, Serialize};

use crate::encoder::encode_text;
use crate::error::{Error, Result};
use crate::model::TokenizerModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FertilityReport {
    pub phi: f64,
    pub token_count: u64,
    pub word_count: u64,
    /// Units the tokens are counted against (whitespace words, or the
    /// tokens of a baseline model).
    pub baseline_count: u64,
    pub baseline: String,
}

/// Tokens per whitespace word over the whole corpus.
pub fn fertility(model: &TokenizerModel, corpus: &str) -> Result<FertilityReport> {
    let (tokens, words) = count(model, corpus);
    if words == 0 {
        return Err(Error::Empty("fertility corpus"));
    }
    Ok(FertilityReport {
        phi: tokens as f64 / words as f64,
        token_count: tokens,
        word_count: words,
        baseline_count: words,
        baseline: "whitespace".into(),
    })
}

/// Tokens of `model` relative to the tokens `baseline` produces on the
/// same corpus.
pub fn fertility_against(
    model: &TokenizerModel,
    baseline: &TokenizerModel,
    baseline_name: &str,
    corpus: &str,
) -> Result<FertilityReport> {
    let (tokens, words) = count(model, corpus);
    let (base, _) = count(baseline, corpus);
    if words == 0 || base == 0 {
        return Err(Error::Empty("fertility corpus"));
    }
    Ok(FertilityReport {
        phi: tokens as f64 / base as f64,
        token_count: tokens,
        word_count: words,
        baseline_count: base,
        baseline: baseline_name.to_owned(),
    })
}

fn count(model: &TokenizerModel, corpus: &str) -> (u64, u64) {
    let enc = encode_text(model, corpus);
    let tokens = enc.iter().map(|w| w.ids.len() as u64).sum();
    (tokens, enc.len() as u64)
}
