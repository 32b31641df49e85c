//! Browser demo: BPE and MorphBPE trained on the bundled English fixture,
//! compared word by word against gold morphemes.
//!
//! The `Demo` methods return JSON strings; `www/index.html` parses them.

use std::collections::HashMap;

use morphbpe::ingest::{parse_segmentation, split_dataset, SplitSpec, DEFAULT_SEPARATOR};
use morphbpe::inspect::{inspect_text, WordView};
use morphbpe::metrics::{align, corpus_mu_e, morph_edit_distance, MuEOptions};
use morphbpe::{train, Mode, SegmentationDataset, TokenizerModel, TrainConfig, WordFrequencyTable};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const COUNTS: &str = include_str!("../../core/data/en_synth_counts.tsv");
const LEXICON: &str = include_str!("../../core/data/en_synth_lexicon.tsv");

/// Largest vocabulary trained; smaller sizes are prefixes of it.
pub const MAX_VOCAB: usize = 1600;
const CURVE_STEP: usize = 100;

/// Separator between morphemes in gold strings typed into the page.
pub const GOLD_SEPARATOR: char = '+';

#[wasm_bindgen]
pub struct Demo {
    bpe: TokenizerModel,
    morph: TokenizerModel,
    lexicon: HashMap<String, Vec<String>>,
    test: SegmentationDataset,
}

#[derive(Serialize)]
struct Side {
    mode: Mode,
    vocab_size: usize,
    words: Vec<WordView>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mean_mu_e: Option<f64>,
}

#[derive(Serialize)]
struct Comparison {
    bpe: Side,
    morph: Side,
}

#[derive(Serialize)]
struct CurvePoint {
    vocab_size: usize,
    bpe: f64,
    morph: f64,
}

impl Demo {
    /// Trains both modes on the fixture counts. MorphBPE sees the segmentations
    /// of the training split only, so the curve is measured on unseen words.
    pub fn build() -> Result<Demo, String> {
        let words = WordFrequencyTable::from_tsv(COUNTS).map_err(|e| e.to_string())?;
        let (all, _) =
            parse_segmentation(LEXICON, DEFAULT_SEPARATOR, "en", "fixture").map_err(|e| e.to_string())?;
        let split = split_dataset(&all, &SplitSpec::standard(0)).map_err(|e| e.to_string())?;
        let fit = |mode, lex| {
            train(&words, lex, &TrainConfig::new(MAX_VOCAB, mode))
                .map(|o| o.model)
                .map_err(|e| e.to_string())
        };
        let bpe = fit(Mode::VanillaBpe, None)?;
        let morph = fit(Mode::MorphBpe, Some(&split.train))?;
        let lexicon = all
            .records()
            .iter()
            .map(|r| (r.surface().to_owned(), r.morphemes().to_vec()))
            .collect();
        Ok(Demo {
            bpe,
            morph,
            lexicon,
            test: split.test,
        })
    }

    fn sized(&self, vocab_size: usize) -> Result<(TokenizerModel, TokenizerModel), String> {
        let cut = |m: &TokenizerModel| {
            m.truncated(vocab_size.min(m.vocab_size()))
                .map_err(|e| e.to_string())
        };
        Ok((cut(&self.bpe)?, cut(&self.morph)?))
    }

    /// Both encodings of `text` at `vocab_size`. `gold` is empty or one
    /// `+`-separated morpheme list per word.
    pub fn compare_json(&self, text: &str, vocab_size: usize, gold: &str) -> Result<String, String> {
        let gold = parse_gold(gold);
        let gold = (!gold.is_empty()).then_some(gold);
        let (bpe, morph) = self.sized(vocab_size)?;
        let side = |m: &TokenizerModel| -> Result<Side, String> {
            let words = inspect_text(m, text, gold.as_deref(), true).map_err(|e| e.to_string())?;
            let scored: Vec<f64> = words.iter().filter_map(|w| w.mu_e).map(f64::from).collect();
            Ok(Side {
                mode: m.mode(),
                vocab_size: m.vocab_size(),
                mean_mu_e: (!scored.is_empty()).then(|| scored.iter().sum::<f64>() / scored.len() as f64),
                words,
            })
        };
        let out = Comparison {
            bpe: side(&bpe)?,
            morph: side(&morph)?,
        };
        Ok(serde_json::to_string(&out).expect("serializable"))
    }

    /// Mean μ_e on the held-out test words at every `CURVE_STEP` sizes.
    pub fn curve_json(&self) -> Result<String, String> {
        let start = self.bpe.alphabet_size().div_ceil(CURVE_STEP) * CURVE_STEP;
        let opts = MuEOptions::default();
        let mut points = Vec::new();
        for size in (start..=MAX_VOCAB).step_by(CURVE_STEP) {
            let (bpe, morph) = self.sized(size)?;
            let score = |m| {
                corpus_mu_e(m, &self.test, opts)
                    .map(|r| r.mean_mu_e)
                    .map_err(|e| e.to_string())
            };
            points.push(CurvePoint {
                vocab_size: size,
                bpe: score(&bpe)?,
                morph: score(&morph)?,
            });
        }
        Ok(serde_json::to_string(&points).expect("serializable"))
    }

    /// Gold string for `text` from the fixture lexicon; unknown words are
    /// left whole.
    pub fn lookup(&self, text: &str) -> String {
        text.split_whitespace()
            .map(|w| match self.lexicon.get(&*morphbpe::normalize(w)) {
                Some(m) => m.join(&GOLD_SEPARATOR.to_string()),
                None => w.to_owned(),
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Optimal alignment of whitespace-separated `tokens` onto `morphemes`.
pub fn align_json(tokens: &str, morphemes: &str) -> String {
    let t: Vec<&str> = tokens.split_whitespace().collect();
    let m: Vec<&str> = morphemes.split_whitespace().collect();
    serde_json::json!({
        "distance": morph_edit_distance(&t, &m),
        "ops": align(&t, &m),
    })
    .to_string()
}

fn parse_gold(gold: &str) -> Vec<Vec<String>> {
    gold.split_whitespace()
        .map(|w| w.split(GOLD_SEPARATOR).map(str::to_owned).collect())
        .collect()
}

#[wasm_bindgen]
impl Demo {
    #[wasm_bindgen(constructor)]
    pub fn new() -> Result<Demo, JsError> {
        Demo::build().map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(js_name = maxVocab)]
    pub fn max_vocab(&self) -> usize {
        MAX_VOCAB
    }

    pub fn compare(&self, text: &str, vocab_size: usize, gold: &str) -> Result<String, JsError> {
        self.compare_json(text, vocab_size, gold)
            .map_err(|e| JsError::new(&e))
    }

    pub fn curve(&self) -> Result<String, JsError> {
        self.curve_json().map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(js_name = lookup)]
    pub fn lookup_js(&self, text: &str) -> String {
        self.lookup(text)
    }
}

#[wasm_bindgen(js_name = align)]
pub fn align_js(tokens: &str, morphemes: &str) -> String {
    align_json(tokens, morphemes)
}
