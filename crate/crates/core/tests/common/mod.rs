//! Test support: bundled fixtures and brute-force oracles that share no code
//! with the library's training and encoding paths.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use morphbpe::ingest::{parse_segmentation, SegmentationDataset};
use morphbpe::{SegmentedWord, WordFrequencyTable, UNK_TOKEN};
use rand::Rng;

pub const EN_LEXICON: &str = include_str!("../../data/en_synth_lexicon.tsv");
pub const EN_COUNTS: &str = include_str!("../../data/en_synth_counts.tsv");

pub fn en_lexicon() -> SegmentationDataset {
    parse_segmentation(EN_LEXICON, "|", "en", "en_synth_lexicon.tsv")
        .unwrap()
        .0
}

pub fn en_counts() -> WordFrequencyTable {
    WordFrequencyTable::from_tsv(EN_COUNTS).unwrap()
}

/// Merge sequence (left, right, frequency) from recounting every pair at
/// every step. Words are lists of spans; pairs never cross spans.
pub fn oracle_train(
    words: &[(Vec<Vec<String>>, u64)],
    target_vocab: usize,
    min_freq: u64,
) -> Vec<(String, String, u64)> {
    let mut words: Vec<(Vec<Vec<String>>, u64)> = words.to_vec();
    let mut vocab: BTreeSet<String> = BTreeSet::new();
    vocab.insert(UNK_TOKEN.to_owned());
    for (spans, _) in &words {
        for s in spans {
            vocab.extend(s.iter().cloned());
        }
    }
    let mut banned: BTreeSet<(String, String)> = BTreeSet::new();
    let mut out = Vec::new();
    while vocab.len() < target_vocab {
        let mut counts: BTreeMap<(String, String), u64> = BTreeMap::new();
        for (spans, c) in &words {
            for s in spans {
                for i in 1..s.len() {
                    *counts.entry((s[i - 1].clone(), s[i].clone())).or_insert(0) += c;
                }
            }
        }
        // BTreeMap iterates pairs in ascending order; keep the first maximum.
        let mut best: Option<(&(String, String), u64)> = None;
        for (p, &c) in &counts {
            if banned.contains(p) {
                continue;
            }
            if best.is_none_or(|(_, bc)| c > bc) {
                best = Some((p, c));
            }
        }
        let Some((pair, freq)) = best else { break };
        if freq < min_freq {
            break;
        }
        let pair = pair.clone();
        let merged = format!("{}{}", pair.0, pair.1);
        if merged == UNK_TOKEN {
            banned.insert(pair);
            continue;
        }
        for (spans, _) in words.iter_mut() {
            for s in spans.iter_mut() {
                let mut next = Vec::with_capacity(s.len());
                let mut i = 0;
                while i < s.len() {
                    if i + 1 < s.len() && s[i] == pair.0 && s[i + 1] == pair.1 {
                        next.push(merged.clone());
                        i += 2;
                    } else {
                        next.push(s[i].clone());
                        i += 1;
                    }
                }
                *s = next;
            }
        }
        vocab.insert(merged);
        out.push((pair.0, pair.1, freq));
    }
    out
}

/// Splits a word into character spans per its morphemes (or one span).
pub fn char_spans(morphemes: &[String]) -> Vec<Vec<String>> {
    morphemes
        .iter()
        .map(|m| m.chars().map(String::from).collect())
        .collect()
}

/// Random small corpus with a segmentation for each word.
pub fn random_corpus<R: Rng>(rng: &mut R, max_words: usize, alphabet: usize) -> Vec<(SegmentedWord, u64)> {
    let letters: Vec<char> = ('a'..='z').take(alphabet).collect();
    let n = rng.random_range(1..=max_words);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for _ in 0..n {
        let len = rng.random_range(1..=8);
        let w: String = (0..len)
            .map(|_| letters[rng.random_range(0..letters.len())])
            .collect();
        if !seen.insert(w.clone()) {
            continue;
        }
        out.push((random_segmentation(rng, &w), rng.random_range(1..=20)));
    }
    out
}

pub fn random_segmentation<R: Rng>(rng: &mut R, word: &str) -> SegmentedWord {
    let chars: Vec<char> = word.chars().collect();
    let mut morphs = Vec::new();
    let mut cur = String::new();
    for (i, c) in chars.iter().enumerate() {
        cur.push(*c);
        if i + 1 < chars.len() && rng.random_bool(0.3) {
            morphs.push(std::mem::take(&mut cur));
        }
    }
    morphs.push(cur);
    SegmentedWord::new(word, &morphs).unwrap()
}

pub fn table_and_lexicon(corpus: &[(SegmentedWord, u64)]) -> (WordFrequencyTable, SegmentationDataset) {
    let table: WordFrequencyTable = corpus.iter().map(|(w, c)| (w.surface(), *c)).collect();
    let lex = SegmentationDataset::from_records("t", "t", corpus.iter().map(|(w, _)| w.clone())).0;
    (table, lex)
}

/// Naive exponential edit distance.
pub fn recursive_edit(a: &[&str], b: &[&str]) -> u32 {
    if a.is_empty() {
        return b.len() as u32;
    }
    if b.is_empty() {
        return a.len() as u32;
    }
    let sub = recursive_edit(&a[1..], &b[1..]) + u32::from(a[0] != b[0]);
    let del = recursive_edit(&a[1..], b) + 1;
    let ins = recursive_edit(a, &b[1..]) + 1;
    sub.min(del).min(ins)
}
