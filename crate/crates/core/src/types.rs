use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use unicode_normalization::{is_nfc, UnicodeNormalization};

use crate::error::{Error, Result};

/// NFC-normalizes `s`, borrowing when it is already normalized.
pub fn normalize(s: &str) -> std::borrow::Cow<'_, str> {
    if is_nfc(s) {
        std::borrow::Cow::Borrowed(s)
    } else {
        std::borrow::Cow::Owned(s.nfc().collect())
    }
}

/// A surface form together with its gold morphemes, in order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SegmentedWord {
    surface: String,
    morphemes: Vec<String>,
}

impl SegmentedWord {
    /// Builds a segmented word, normalizing surface and morphemes to NFC.
    ///
    /// Fails unless the morphemes are non-empty, whitespace-free and
    /// concatenate to the surface.
    pub fn new<S: AsRef<str>>(surface: &str, morphemes: &[S]) -> Result<Self> {
        let surface = normalize(surface).into_owned();
        if surface.is_empty() {
            return Err(Error::Invariant("empty surface form".into()));
        }
        if surface.chars().any(char::is_whitespace) {
            return Err(Error::Invariant(format!(
                "surface {surface:?} contains whitespace"
            )));
        }
        if morphemes.is_empty() {
            return Err(Error::Invariant(format!("{surface:?} has no morphemes")));
        }
        let morphemes: Vec<String> = morphemes
            .iter()
            .map(|m| normalize(m.as_ref()).into_owned())
            .collect();
        if morphemes.iter().any(String::is_empty) {
            return Err(Error::Invariant(format!("{surface:?} has an empty morpheme")));
        }
        let joined: String = morphemes.concat();
        if joined != surface {
            return Err(Error::Invariant(format!(
                "morphemes concatenate to {joined:?}, not {surface:?}"
            )));
        }
        Ok(SegmentedWord { surface, morphemes })
    }

    /// A word treated as one morpheme.
    pub fn monomorphemic(surface: &str) -> Result<Self> {
        Self::new(surface, &[surface])
    }

    pub fn surface(&self) -> &str {
        &self.surface
    }

    pub fn morphemes(&self) -> &[String] {
        &self.morphemes
    }

    /// Character offsets where one morpheme ends and the next begins.
    pub fn boundaries(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.morphemes.len().saturating_sub(1));
        let mut pos = 0;
        for m in &self.morphemes[..self.morphemes.len() - 1] {
            pos += m.chars().count();
            out.push(pos);
        }
        out
    }
}

/// Word counts from a whitespace-pretokenized corpus.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WordFrequencyTable {
    entries: BTreeMap<String, u64>,
    total_words: u64,
}

impl WordFrequencyTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `count` occurrences of `word` (normalized). Empty or
    /// whitespace-bearing words and zero counts are rejected.
    pub fn add(&mut self, word: &str, count: u64) -> Result<()> {
        if count == 0 {
            return Err(Error::Invariant(format!("zero count for {word:?}")));
        }
        let word = normalize(word);
        if word.is_empty() || word.chars().any(char::is_whitespace) {
            return Err(Error::Invariant(format!("invalid word {word:?}")));
        }
        *self.entries.entry(word.into_owned()).or_insert(0) += count;
        self.total_words += count;
        Ok(())
    }

    /// Counts every whitespace-delimited token of `text`.
    pub fn add_text(&mut self, text: &str) {
        let text = normalize(text);
        for w in text.split_whitespace() {
            *self.entries.entry(w.to_owned()).or_insert(0) += 1;
            self.total_words += 1;
        }
    }

    pub fn get(&self, word: &str) -> Option<u64> {
        self.entries.get(word).copied()
    }

    /// Entries in code-point order of the word.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> + '_ {
        self.entries.iter().map(|(w, &c)| (w.as_str(), c))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_words(&self) -> u64 {
        self.total_words
    }

    /// `word<TAB>count` lines, most frequent first, ties in code-point order.
    pub fn to_tsv(&self) -> String {
        let mut rows: Vec<(&str, u64)> = self.iter().collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        let mut out = String::new();
        for (w, c) in rows {
            out.push_str(w);
            out.push('\t');
            out.push_str(&c.to_string());
            out.push('\n');
        }
        out
    }

    /// Parses the `word<TAB>count` export format.
    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut table = Self::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let (w, c) = line
                .split_once('\t')
                .ok_or_else(|| Error::Format(format!("line {}: expected word<TAB>count", i + 1)))?;
            let c: u64 = c
                .trim()
                .parse()
                .map_err(|_| Error::Format(format!("line {}: bad count {c:?}", i + 1)))?;
            table.add(w, c)?;
        }
        Ok(table)
    }
}

impl<S: AsRef<str>> FromIterator<(S, u64)> for WordFrequencyTable {
    /// Panics on invalid entries; intended for literals and tests.
    fn from_iter<I: IntoIterator<Item = (S, u64)>>(iter: I) -> Self {
        let mut t = Self::new();
        for (w, c) in iter {
            t.add(w.as_ref(), c).expect("valid word frequency entry");
        }
        t
    }
}
