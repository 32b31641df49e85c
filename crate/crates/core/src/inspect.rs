//! Per-word views of an encoding against optional gold morphemes, for
//! interactive front ends.

use serde::{Deserialize, Serialize};

use crate::encoder::encode_text;
use crate::error::{Error, Result};
use crate::metrics::{align, morph_edit_distance, EditOp};
use crate::model::TokenizerModel;
use crate::types::SegmentedWord;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordView {
    pub word: String,
    pub start: usize,
    pub end: usize,
    pub tokens: Vec<String>,
    pub ids: Vec<u32>,
    /// Character ranges in the (normalized) input text.
    pub offsets: Vec<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gold: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu_e: Option<u32>,
    /// Per token: whether it spans a gold morpheme boundary.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub boundary_violations: Option<Vec<bool>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alignment: Option<Vec<EditOp>>,
    /// Set when the supplied gold split does not spell the word.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Encodes `text` and, when `gold` is given (one morpheme list per
/// whitespace-delimited word), scores each word against it.
///
/// A gold list that does not concatenate to its word yields a warning on
/// that word rather than an error; a gold list count different from the
/// word count is an error.
pub fn inspect_text(
    model: &TokenizerModel,
    text: &str,
    gold: Option<&[Vec<String>]>,
    with_alignment: bool,
) -> Result<Vec<WordView>> {
    let encoded = encode_text(model, text);
    if let Some(g) = gold {
        if g.len() != encoded.len() {
            return Err(Error::Config(format!(
                "gold segmentation has {} entries but the text has {} words",
                g.len(),
                encoded.len()
            )));
        }
    }
    let views = encoded
        .into_iter()
        .enumerate()
        .map(|(i, w)| {
            let mut view = WordView {
                word: w.word,
                start: w.start,
                end: w.end,
                tokens: w.tokens,
                ids: w.ids,
                offsets: w.token_offsets,
                gold: None,
                mu_e: None,
                boundary_violations: None,
                alignment: None,
                warning: None,
            };
            let Some(morphs) = gold.map(|g| &g[i]) else {
                return view;
            };
            match SegmentedWord::new(&view.word, morphs) {
                Ok(sw) => {
                    let bounds: Vec<usize> = sw.boundaries().iter().map(|b| b + view.start).collect();
                    view.boundary_violations = Some(
                        view.offsets
                            .iter()
                            .map(|&(s, e)| bounds.iter().any(|&b| s < b && b < e))
                            .collect(),
                    );
                    view.mu_e = Some(morph_edit_distance(&view.tokens, sw.morphemes()));
                    if with_alignment {
                        view.alignment = Some(align(&view.tokens, sw.morphemes()));
                    }
                    view.gold = Some(sw.morphemes().to_vec());
                }
                Err(e) => {
                    view.warning = Some(match e {
                        Error::Invariant(msg) => msg,
                        other => other.to_string(),
                    });
                }
            }
            view
        })
        .collect();
    Ok(views)
}
