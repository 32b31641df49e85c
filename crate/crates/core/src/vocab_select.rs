//! Vocabulary-size selection by significance of edit-distance improvements.
//!
//! One training run at the largest size yields every smaller model as a
//! prefix of its merge table. Each size is scored by per-word μ_e on a dev
//! set, and consecutive sizes are compared with a paired two-sided t-test.
//! The selected size is the smallest one whose step to the next size is not
//! a significant improvement.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::SegmentationDataset;
use crate::metrics::{corpus_mu_e, MuEOptions};
use crate::model::{Mode, TokenizerModel};
use crate::stats::{paired_t_test, TTest};
use crate::trainer::{train, TrainConfig};
use crate::types::WordFrequencyTable;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub size: usize,
    /// Vocabulary actually reached (smaller than `size` if training ran
    /// out of pairs).
    pub achieved_vocab_size: usize,
    pub mean_mu_e: f64,
    pub per_word: Vec<u32>,
    /// Test of this size against the previous one.
    pub vs_previous: Option<TTest>,
    pub selected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub mode: Mode,
    pub alpha: f64,
    pub entries: Vec<SweepEntry>,
    pub selected_size: usize,
}

impl SweepResult {
    pub fn markdown(&self) -> String {
        let mut out = String::from("| size | mean μe | p vs previous | selected |\n|---|---|---|---|\n");
        for e in &self.entries {
            let p = e
                .vs_previous
                .map(|t| format!("{:.3e}", t.p_value))
                .unwrap_or_else(|| "-".into());
            out.push_str(&format!(
                "| {} | {:.4} | {} | {} |\n",
                e.size,
                e.mean_mu_e,
                p,
                if e.selected { "yes" } else { "" }
            ));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub mode: Mode,
    pub sizes: Vec<usize>,
    pub alpha: f64,
    pub min_pair_frequency: u64,
    pub use_gold_boundaries: bool,
}

impl SweepConfig {
    pub fn new(mode: Mode, sizes: Vec<usize>) -> Self {
        SweepConfig {
            mode,
            sizes,
            alpha: 0.05,
            min_pair_frequency: 2,
            use_gold_boundaries: false,
        }
    }
}

/// `8000, 16000, ..., 96000`.
pub fn default_sizes() -> Vec<usize> {
    (1..=12).map(|k| k * 8000).collect()
}

/// Whether the step `before -> after` is a significant improvement
/// (a significant decrease in μ_e).
fn improves(t: &Option<TTest>, alpha: f64) -> bool {
    t.is_some_and(|t| t.mean_diff < 0.0 && t.p_value < alpha)
}

/// Index of the selected size given the tests between consecutive sizes
/// (`steps[i]` compares size i to size i+1).
pub fn select_index(steps: &[Option<TTest>], alpha: f64) -> usize {
    steps
        .iter()
        .position(|t| !improves(t, alpha))
        .unwrap_or(steps.len())
}

/// Scores `model` truncated to each size and selects one.
pub fn sweep_model(
    model: &TokenizerModel,
    dev: &SegmentationDataset,
    cfg: &SweepConfig,
) -> Result<SweepResult> {
    check_sizes(&cfg.sizes)?;
    if dev.is_empty() {
        return Err(Error::Empty("dev set"));
    }
    let opts = MuEOptions {
        use_gold_boundaries: cfg.use_gold_boundaries,
        keep_per_word: true,
    };
    let mut entries: Vec<SweepEntry> = Vec::with_capacity(cfg.sizes.len());
    for &size in &cfg.sizes {
        let m = model.truncated(size)?;
        let report = corpus_mu_e(&m, dev, opts)?;
        let per_word = report.per_word.unwrap_or_default();
        let vs_previous = entries.last().and_then(|prev| {
            let before: Vec<f64> = prev.per_word.iter().map(|&d| f64::from(d)).collect();
            let after: Vec<f64> = per_word.iter().map(|&d| f64::from(d)).collect();
            paired_t_test(&before, &after)
        });
        entries.push(SweepEntry {
            size,
            achieved_vocab_size: m.vocab_size(),
            mean_mu_e: report.mean_mu_e,
            per_word,
            vs_previous,
            selected: false,
        });
    }
    let steps: Vec<Option<TTest>> = entries.iter().skip(1).map(|e| e.vs_previous).collect();
    let idx = select_index(&steps, cfg.alpha);
    entries[idx].selected = true;
    Ok(SweepResult {
        mode: cfg.mode,
        alpha: cfg.alpha,
        selected_size: entries[idx].size,
        entries,
    })
}

/// Trains once at the largest size, then scores every size on `dev`.
pub fn sweep(
    words: &WordFrequencyTable,
    lexicon: Option<&SegmentationDataset>,
    dev: &SegmentationDataset,
    cfg: &SweepConfig,
) -> Result<SweepResult> {
    check_sizes(&cfg.sizes)?;
    let max = *cfg.sizes.last().expect("checked non-empty");
    let train_cfg = TrainConfig::new(max, cfg.mode).min_pair_frequency(cfg.min_pair_frequency);
    let model = train(words, lexicon, &train_cfg)?.model;
    sweep_model(&model, dev, cfg)
}

fn check_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.is_empty() {
        return Err(Error::Config("no vocabulary sizes to sweep".into()));
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!("sizes must strictly increase: {sizes:?}")));
    }
    Ok(())
}

/// Parses `start..end:step` (inclusive end) or a comma-separated list.
pub fn parse_sizes(spec: &str) -> Result<Vec<usize>> {
    let bad = || {
        Error::Config(format!(
            "bad size list {spec:?}; use 8000..96000:8000 or 8000,16000"
        ))
    };
    let sizes: Vec<usize> = if let Some((range, step)) = spec.split_once(':') {
        let (a, b) = range.split_once("..").ok_or_else(bad)?;
        let (a, b, step): (usize, usize, usize) = (
            a.trim().parse().map_err(|_| bad())?,
            b.trim().parse().map_err(|_| bad())?,
            step.trim().parse().map_err(|_| bad())?,
        );
        if step == 0 || a > b {
            return Err(bad());
        }
        (a..=b).step_by(step).collect()
    } else {
        spec.split(',')
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?
    };
    check_sizes(&sizes)?;
    Ok(sizes)
}
