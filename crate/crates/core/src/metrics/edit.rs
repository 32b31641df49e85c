use serde::{Deserialize, Serialize};

use crate::encoder::{encode_segmented_pieces, encode_word_pieces};
use crate::error::{Error, Result};
use crate::ingest::SegmentationDataset;
use crate::model::TokenizerModel;

/// Levenshtein distance between two sequences of strings, with unit costs
/// and exact string equality as the match test.
pub fn morph_edit_distance<A, B>(tokens: &[A], morphemes: &[B]) -> u32
where
    A: AsRef<str>,
    B: AsRef<str>,
{
    let m = morphemes.len();
    let mut prev: Vec<u32> = (0..=m as u32).collect();
    let mut cur = vec![0u32; m + 1];
    for (i, t) in tokens.iter().enumerate() {
        cur[0] = i as u32 + 1;
        for j in 0..m {
            let sub = prev[j] + u32::from(t.as_ref() != morphemes[j].as_ref());
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[m]
}

/// One step of an optimal alignment of tokens onto morphemes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "lowercase")]
pub enum EditOp {
    Match {
        token: String,
    },
    Substitute {
        token: String,
        morpheme: String,
    },
    /// A token with no morpheme counterpart.
    Delete {
        token: String,
    },
    /// A morpheme with no token counterpart.
    Insert {
        morpheme: String,
    },
}

/// An optimal alignment, preferring match/substitute, then delete, then
/// insert when several are optimal. Its non-match steps number
/// [`morph_edit_distance`].
pub fn align<A, B>(tokens: &[A], morphemes: &[B]) -> Vec<EditOp>
where
    A: AsRef<str>,
    B: AsRef<str>,
{
    let (n, m) = (tokens.len(), morphemes.len());
    let mut d = vec![vec![0u32; m + 1]; n + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i as u32;
    }
    for (j, cell) in d[0].iter_mut().enumerate() {
        *cell = j as u32;
    }
    for i in 1..=n {
        for j in 1..=m {
            let sub = d[i - 1][j - 1] + u32::from(tokens[i - 1].as_ref() != morphemes[j - 1].as_ref());
            d[i][j] = sub.min(d[i - 1][j] + 1).min(d[i][j - 1] + 1);
        }
    }
    let mut ops = Vec::new();
    let (mut i, mut j) = (n, m);
    while i > 0 || j > 0 {
        if i > 0 && j > 0 {
            let (t, mo) = (tokens[i - 1].as_ref(), morphemes[j - 1].as_ref());
            let same = t == mo;
            if d[i][j] == d[i - 1][j - 1] + u32::from(!same) {
                ops.push(if same {
                    EditOp::Match { token: t.to_owned() }
                } else {
                    EditOp::Substitute {
                        token: t.to_owned(),
                        morpheme: mo.to_owned(),
                    }
                });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && d[i][j] == d[i - 1][j] + 1 {
            ops.push(EditOp::Delete {
                token: tokens[i - 1].as_ref().to_owned(),
            });
            i -= 1;
        } else {
            ops.push(EditOp::Insert {
                morpheme: morphemes[j - 1].as_ref().to_owned(),
            });
            j -= 1;
        }
    }
    ops.reverse();
    ops
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MuEOptions {
    /// Encode each gold morpheme separately instead of the whole word.
    pub use_gold_boundaries: bool,
    pub keep_per_word: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EditDistanceReport {
    /// Average edits per word, not normalized by morpheme count.
    pub mean_mu_e: f64,
    pub word_count: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_word: Option<Vec<u32>>,
}

/// Mean edit distance between each test word's tokens and its morphemes.
pub fn corpus_mu_e(
    model: &TokenizerModel,
    testset: &SegmentationDataset,
    opts: MuEOptions,
) -> Result<EditDistanceReport> {
    if testset.is_empty() {
        return Err(Error::Empty("edit-distance test set"));
    }
    let per_word: Vec<u32> = testset
        .records()
        .iter()
        .map(|r| {
            let pieces = if opts.use_gold_boundaries {
                encode_segmented_pieces(model, r)
            } else {
                encode_word_pieces(model, r.surface())
            };
            morph_edit_distance(&pieces, r.morphemes())
        })
        .collect();
    let total: u64 = per_word.iter().map(|&d| u64::from(d)).sum();
    Ok(EditDistanceReport {
        mean_mu_e: total as f64 / per_word.len() as f64,
        word_count: per_word.len(),
        per_word: opts.keep_per_word.then_some(per_word),
    })
}
