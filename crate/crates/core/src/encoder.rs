//! Standard BPE inference, identical for both training modes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Normalization, TokenizerModel, UNK_ID};
use crate::types::{normalize, SegmentedWord};

fn normalized<'a>(model: &TokenizerModel, s: &'a str) -> std::borrow::Cow<'a, str> {
    match model.normalization() {
        Normalization::Nfc => normalize(s),
        Normalization::None => std::borrow::Cow::Borrowed(s),
    }
}

/// Encodes one whitespace-free word.
///
/// Starts from characters (unknown ones become `<unk>`) and repeatedly
/// applies the lowest-ranked applicable merge, leftmost occurrence first,
/// until no merge applies.
pub fn encode_word(model: &TokenizerModel, word: &str) -> Vec<u32> {
    let word = normalized(model, word);
    merge_symbols(model, chars_to_ids(model, &word))
}

fn chars_to_ids(model: &TokenizerModel, word: &str) -> Vec<u32> {
    let mut buf = [0u8; 4];
    word.chars()
        .map(|c| model.token_id(c.encode_utf8(&mut buf)).unwrap_or(UNK_ID))
        .collect()
}

fn merge_symbols(model: &TokenizerModel, mut syms: Vec<u32>) -> Vec<u32> {
    loop {
        let mut best: Option<(u32, usize, u32)> = None;
        for i in 0..syms.len().saturating_sub(1) {
            if let Some((rank, merged)) = model.merge_rank(syms[i], syms[i + 1]) {
                if best.is_none_or(|(r, _, _)| rank < r) {
                    best = Some((rank, i, merged));
                }
            }
        }
        let Some((_, i, merged)) = best else {
            return syms;
        };
        syms[i] = merged;
        syms.remove(i + 1);
    }
}

/// Surface pieces of `word` under `model`: token strings, except that an
/// `<unk>` piece is the character it stands for.
pub fn encode_word_pieces(model: &TokenizerModel, word: &str) -> Vec<String> {
    let word = normalized(model, word);
    let ids = merge_symbols(model, chars_to_ids(model, &word));
    pieces(model, &word, &ids)
}

fn pieces(model: &TokenizerModel, word: &str, ids: &[u32]) -> Vec<String> {
    let mut chars = word.chars();
    ids.iter()
        .map(|&id| {
            if id == UNK_ID {
                chars.next().map(String::from).unwrap_or_default()
            } else {
                let t = model.token(id).expect("id from model");
                for _ in 0..t.chars().count() {
                    chars.next();
                }
                t.to_owned()
            }
        })
        .collect()
}

/// Encodes each morpheme on its own and concatenates, so no token can
/// cross a gold boundary.
pub fn encode_segmented(model: &TokenizerModel, word: &SegmentedWord) -> Vec<u32> {
    word.morphemes()
        .iter()
        .flat_map(|m| encode_word(model, m))
        .collect()
}

pub fn encode_segmented_pieces(model: &TokenizerModel, word: &SegmentedWord) -> Vec<String> {
    word.morphemes()
        .iter()
        .flat_map(|m| encode_word_pieces(model, m))
        .collect()
}

/// One whitespace-delimited word of an encoded text. Offsets count
/// characters (Unicode scalar values) in the normalized text; ranges are
/// half-open.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodedWord {
    pub word: String,
    pub start: usize,
    pub end: usize,
    pub ids: Vec<u32>,
    pub tokens: Vec<String>,
    pub token_offsets: Vec<(usize, usize)>,
}

/// Pretokenizes on whitespace and encodes every word.
pub fn encode_text(model: &TokenizerModel, text: &str) -> Vec<EncodedWord> {
    let text = normalized(model, text);
    let mut out = Vec::new();
    let mut start: Option<(usize, usize)> = None; // (char index, byte index)
    let mut n = 0;
    let flush = |from: (usize, usize), to_char: usize, to_byte: usize, out: &mut Vec<EncodedWord>| {
        let word = &text[from.1..to_byte];
        let ids = merge_symbols(model, chars_to_ids(model, word));
        let tokens = pieces(model, word, &ids);
        let mut offsets = Vec::with_capacity(tokens.len());
        let mut pos = from.0;
        for t in &tokens {
            let len = t.chars().count();
            offsets.push((pos, pos + len));
            pos += len;
        }
        out.push(EncodedWord {
            word: word.to_owned(),
            start: from.0,
            end: to_char,
            ids,
            tokens,
            token_offsets: offsets,
        });
    };
    for (byte, c) in text.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                flush(s, n, byte, &mut out);
            }
        } else if start.is_none() {
            start = Some((n, byte));
        }
        n += 1;
    }
    if let Some(s) = start {
        flush(s, n, text.len(), &mut out);
    }
    out
}

/// Concatenates token strings; `<unk>` renders as U+FFFD.
pub fn decode(model: &TokenizerModel, ids: &[u32]) -> Result<String> {
    let mut out = String::new();
    for &id in ids {
        if id == UNK_ID {
            out.push('\u{FFFD}');
        } else {
            out.push_str(model.token(id).ok_or(Error::IdOutOfRange(id))?);
        }
    }
    Ok(out)
}

/// Decodes per-word id lists and joins the words with single spaces.
pub fn decode_words<I, W>(model: &TokenizerModel, words: I) -> Result<String>
where
    I: IntoIterator<Item = W>,
    W: AsRef<[u32]>,
{
    let words: Result<Vec<String>> = words.into_iter().map(|w| decode(model, w.as_ref())).collect();
    Ok(words?.join(" "))
}
