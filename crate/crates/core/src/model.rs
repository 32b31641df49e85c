use std::collections::HashMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reserved string of token id 0.
pub const UNK_TOKEN: &str = "<unk>";
pub const UNK_ID: u32 = 0;

const FORMAT_VERSION: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "vanilla-bpe")]
    VanillaBpe,
    #[serde(rename = "morph-bpe")]
    MorphBpe,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::VanillaBpe => "vanilla-bpe",
            Mode::MorphBpe => "morph-bpe",
        }
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    None,
    #[default]
    Nfc,
}

/// One learned merge. `rank` is its position in the merge table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeEvent {
    pub left: String,
    pub right: String,
    pub merged: String,
    pub rank: u32,
    pub frequency: u64,
}

impl MergeEvent {
    pub fn new(left: &str, right: &str, rank: u32, frequency: u64) -> Self {
        MergeEvent {
            left: left.to_owned(),
            right: right.to_owned(),
            merged: format!("{left}{right}"),
            rank,
            frequency,
        }
    }
}

/// A trained tokenizer: vocabulary, ordered merge table and normalization.
///
/// The vocabulary is kept in canonical order: `<unk>`, then single
/// characters, then merged tokens in the order their first producing merge
/// was learned. Construction validates every invariant, so a value of this
/// type is always internally consistent and immutable.
#[derive(Debug, Clone)]
pub struct TokenizerModel {
    vocab: Vec<String>,
    merges: Vec<MergeEvent>,
    mode: Mode,
    normalization: Normalization,
    language: Option<String>,
    ids: HashMap<String, u32>,
    // (left id, right id) -> (rank, merged id)
    ranks: HashMap<(u32, u32), (u32, u32)>,
}

impl PartialEq for TokenizerModel {
    fn eq(&self, other: &Self) -> bool {
        self.vocab == other.vocab
            && self.merges == other.merges
            && self.mode == other.mode
            && self.normalization == other.normalization
            && self.language == other.language
    }
}

impl Eq for TokenizerModel {}

impl TokenizerModel {
    /// Validates and builds a model. `merges` must be in rank order with
    /// `rank` equal to the index.
    pub fn new(
        vocab: Vec<String>,
        merges: Vec<MergeEvent>,
        mode: Mode,
        normalization: Normalization,
    ) -> Result<Self> {
        let ids = validate(&vocab, &merges)?;
        let mut ranks = HashMap::with_capacity(merges.len());
        for m in &merges {
            let key = (ids[&m.left], ids[&m.right]);
            ranks.entry(key).or_insert((m.rank, ids[&m.merged]));
        }
        Ok(TokenizerModel {
            vocab,
            merges,
            mode,
            normalization,
            language: None,
            ids,
            ranks,
        })
    }

    pub fn with_language(mut self, language: impl Into<String>) -> Self {
        self.language = Some(language.into());
        self
    }

    pub fn vocab(&self) -> &[String] {
        &self.vocab
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab.len()
    }

    pub fn merges(&self) -> &[MergeEvent] {
        &self.merges
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn language(&self) -> Option<&str> {
        self.language.as_deref()
    }

    pub fn token_id(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.vocab.get(id as usize).map(String::as_str)
    }

    /// Rank and result id of the merge joining `left` and `right`, if any.
    pub(crate) fn merge_rank(&self, left: u32, right: u32) -> Option<(u32, u32)> {
        self.ranks.get(&(left, right)).copied()
    }

    /// Number of single-character tokens.
    pub fn alphabet_size(&self) -> usize {
        self.vocab[1..].iter().take_while(|t| is_single_char(t)).count()
    }

    /// The model a trainer would have returned had it stopped once the
    /// vocabulary reached `size` entries. Sizes at or beyond the current
    /// vocabulary return a clone.
    pub fn truncated(&self, size: usize) -> Result<TokenizerModel> {
        let base = 1 + self.alphabet_size();
        if size <= base {
            return Err(Error::Config(format!(
                "cannot truncate to {size} entries; the alphabet alone needs {base}"
            )));
        }
        if size >= self.vocab.len() {
            return Ok(self.clone());
        }
        // Keep merges up to and including the one that introduced token size-1.
        let last = &self.vocab[size - 1];
        let cut = self
            .merges
            .iter()
            .position(|m| &m.merged == last)
            .expect("validated: every merged token has a producing merge");
        let mut m = TokenizerModel::new(
            self.vocab[..size].to_vec(),
            self.merges[..=cut].to_vec(),
            self.mode,
            self.normalization,
        )?;
        m.language = self.language.clone();
        Ok(m)
    }
}

fn is_single_char(s: &str) -> bool {
    let mut it = s.chars();
    it.next().is_some() && it.next().is_none()
}

fn validate(vocab: &[String], merges: &[MergeEvent]) -> Result<HashMap<String, u32>> {
    let bad = |msg: String| Err(Error::Invariant(msg));
    if vocab.first().map(String::as_str) != Some(UNK_TOKEN) {
        return bad(format!("vocab[0] must be {UNK_TOKEN:?}"));
    }
    let mut ids = HashMap::with_capacity(vocab.len());
    for (i, tok) in vocab.iter().enumerate() {
        if tok.is_empty() || tok.chars().any(char::is_whitespace) {
            return bad(format!("vocab entry {i} {tok:?} is empty or contains whitespace"));
        }
        if ids.insert(tok.clone(), i as u32).is_some() {
            return bad(format!("duplicate vocab entry {tok:?} at id {i}"));
        }
    }

    // Rank at which each merged token first appears.
    let mut introduced: HashMap<&str, u32> = HashMap::new();
    for (i, m) in merges.iter().enumerate() {
        if m.rank as usize != i {
            return bad(format!("merge at index {i} carries rank {}", m.rank));
        }
        if m.frequency == 0 {
            return bad(format!(
                "merge {i} ({:?}, {:?}) has zero frequency",
                m.left, m.right
            ));
        }
        if m.merged.len() != m.left.len() + m.right.len()
            || !m.merged.starts_with(&m.left)
            || !m.merged.ends_with(&m.right)
        {
            return bad(format!(
                "merge {i}: {:?} is not {:?} + {:?}",
                m.merged, m.left, m.right
            ));
        }
        if m.merged == UNK_TOKEN {
            return bad(format!("merge {i} produces the reserved {UNK_TOKEN:?}"));
        }
        for part in [&m.left, &m.right] {
            if !ids.contains_key(part.as_str()) || part == UNK_TOKEN {
                return bad(format!(
                    "merge {i}: constituent {part:?} is not in the vocabulary"
                ));
            }
            if !is_single_char(part) {
                match introduced.get(part.as_str()) {
                    Some(&r) if r < i as u32 => {}
                    _ => {
                        return bad(format!(
                            "merge {i}: constituent {part:?} is not introduced by an earlier merge"
                        ))
                    }
                }
            }
        }
        if !ids.contains_key(&m.merged) {
            return bad(format!(
                "merge {i}: result {:?} is not in the vocabulary",
                m.merged
            ));
        }
        introduced.entry(m.merged.as_str()).or_insert(i as u32);
    }

    // Canonical order: characters, then merged tokens by introduction rank.
    let mut seen_merged = false;
    let mut last_rank: Option<u32> = None;
    for (i, tok) in vocab.iter().enumerate().skip(1) {
        if is_single_char(tok) {
            if seen_merged {
                return bad(format!("character {tok:?} at id {i} follows merged tokens"));
            }
            continue;
        }
        seen_merged = true;
        let Some(&r) = introduced.get(tok.as_str()) else {
            return bad(format!("vocab entry {tok:?} at id {i} is produced by no merge"));
        };
        if last_rank.is_some_and(|l| r <= l) {
            return bad(format!(
                "vocab entry {tok:?} at id {i} is out of introduction order"
            ));
        }
        last_rank = Some(r);
    }
    Ok(ids)
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u64,
    mode: Mode,
    normalization: Normalization,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    language: Option<String>,
    vocab: Vec<String>,
    merges: Vec<(String, String, u64)>,
}

impl TokenizerModel {
    pub fn to_json(&self) -> String {
        let file = ModelFile {
            format_version: FORMAT_VERSION,
            mode: self.mode,
            normalization: self.normalization,
            language: self.language.clone(),
            vocab: self.vocab.clone(),
            merges: self
                .merges
                .iter()
                .map(|m| (m.left.clone(), m.right.clone(), m.frequency))
                .collect(),
        };
        let mut s = serde_json::to_string(&file).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let text = text.strip_prefix('\u{feff}').unwrap_or(text);
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        match value.get("format_version").and_then(|v| v.as_u64()) {
            Some(FORMAT_VERSION) => {}
            Some(v) => return Err(Error::UnsupportedVersion(v)),
            None => return Err(Error::Format("missing format_version".into())),
        }
        let file: ModelFile = serde_json::from_value(value).map_err(|e| Error::Format(e.to_string()))?;
        let merges = file
            .merges
            .into_iter()
            .enumerate()
            .map(|(i, (l, r, f))| MergeEvent::new(&l, &r, i as u32, f))
            .collect();
        let mut model = TokenizerModel::new(file.vocab, merges, file.mode, file.normalization)?;
        model.language = file.language;
        Ok(model)
    }
}

/// Writes `model` as JSON to `path`.
pub fn save_model(model: &TokenizerModel, path: impl AsRef<std::path::Path>) -> Result<()> {
    let path = path.as_ref();
    let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(model.to_json().as_bytes())
        .map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<std::path::Path>) -> Result<TokenizerModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    TokenizerModel::from_json(&text)
}
