use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::kmeans::{hashed_features, kmeans, Clustering};
use crate::encoder::encode_word_pieces;
use crate::error::{Error, Result};
use crate::ingest::SegmentationDataset;
use crate::model::TokenizerModel;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConsistencyConfig {
    /// Number of k-means clusters.
    pub k: usize,
    /// Word pairs sampled per cluster per resample.
    pub pairs_per_cluster: usize,
    /// Bootstrap resamples.
    pub resamples: usize,
    pub seed: u64,
    /// Hashing dimension of the bag-of-morphemes vectors.
    pub feature_dim: usize,
    pub kmeans_iterations: usize,
    /// Tokens shorter than this many characters never count as shared.
    pub min_token_len: usize,
}

impl Default for ConsistencyConfig {
    fn default() -> Self {
        ConsistencyConfig {
            k: 100,
            pairs_per_cluster: 50,
            resamples: 10,
            seed: 0,
            feature_dim: 1024,
            kmeans_iterations: 25,
            min_token_len: 1,
        }
    }
}

impl ConsistencyConfig {
    fn validate(&self) -> Result<()> {
        if self.k < 2 || self.pairs_per_cluster < 1 || self.resamples < 2 || self.feature_dim < 1 {
            return Err(Error::Config(format!(
                "consistency needs k >= 2, pairs >= 1, resamples >= 2, dim >= 1 (got {}, {}, {}, {})",
                self.k, self.pairs_per_cluster, self.resamples, self.feature_dim
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub precision_mean: f64,
    pub precision_std: f64,
    pub recall_mean: f64,
    pub recall_std: f64,
    /// Harmonic mean of the two means.
    pub f1: f64,
    /// Resamples in which precision (resp. recall) was defined.
    pub precision_resamples: usize,
    pub recall_resamples: usize,
    pub pairs_per_resample: usize,
}

impl ConsistencyReport {
    /// A Markdown table row: label, precision, recall, F1.
    pub fn markdown_row(&self, label: &str) -> String {
        format!(
            "| {label} | {:.2} ± {:.2} | {:.2} ± {:.2} | {:.2} |",
            self.precision_mean, self.precision_std, self.recall_mean, self.recall_std, self.f1
        )
    }

    pub fn markdown_header() -> &'static str {
        "| Model | Precision (Mean ± Std) | Recall (Mean ± Std) | Morph.-Consistency F1 (μc) |\n\
         |---|---|---|---|"
    }
}

/// `2PR / (P + R)`, or 0 when both are 0.
pub fn f1(precision: f64, recall: f64) -> f64 {
    if precision + recall == 0.0 {
        0.0
    } else {
        2.0 * precision * recall / (precision + recall)
    }
}

fn shares<T: Ord>(a: &[T], b: &[T]) -> bool {
    // both sorted
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// The i-th unordered pair (a < b) among `m` items in row-major order.
fn pair_at(mut idx: usize, m: usize) -> (usize, usize) {
    let mut a = 0;
    loop {
        let row = m - 1 - a;
        if idx < row {
            return (a, a + 1 + idx);
        }
        idx -= row;
        a += 1;
    }
}

/// Clusters `dataset` by bag-of-morphemes vectors with the same procedure
/// [`morph_consistency`] uses.
pub fn cluster_words(dataset: &SegmentationDataset, cfg: &ConsistencyConfig) -> Result<Clustering> {
    cfg.validate()?;
    if dataset.len() < cfg.k {
        return Err(Error::Config(format!(
            "consistency needs at least k = {} words, got {}",
            cfg.k,
            dataset.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    Ok(cluster_with(dataset, cfg, &mut rng))
}

fn cluster_with(dataset: &SegmentationDataset, cfg: &ConsistencyConfig, rng: &mut ChaCha8Rng) -> Clustering {
    let points: Vec<Vec<u32>> = dataset
        .records()
        .iter()
        .map(|r| hashed_features(r.morphemes(), cfg.feature_dim))
        .collect();
    kmeans(&points, cfg.feature_dim, cfg.k, cfg.kmeans_iterations, rng)
}

/// Morphological consistency of `model` on `dataset`.
///
/// Words are clustered by their morphemes; each resample draws up to
/// `pairs_per_cluster` distinct word pairs from every cluster. For a pair,
/// A = the words share a morpheme and B = they share a token. Precision is
/// |A and B| / |B| and recall |A and B| / |A| over the pooled pairs of one
/// resample; a resample where a ratio has a zero denominator is skipped for
/// that ratio.
pub fn morph_consistency(
    model: &TokenizerModel,
    dataset: &SegmentationDataset,
    cfg: &ConsistencyConfig,
) -> Result<ConsistencyReport> {
    cfg.validate()?;
    if dataset.len() < cfg.k {
        return Err(Error::Config(format!(
            "consistency needs at least k = {} words, got {}",
            cfg.k,
            dataset.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let clusters = cluster_with(dataset, cfg, &mut rng).members();

    let morphs: Vec<Vec<&str>> = dataset
        .records()
        .iter()
        .map(|r| {
            let mut v: Vec<&str> = r.morphemes().iter().map(String::as_str).collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    let tokens: Vec<Vec<String>> = dataset
        .records()
        .iter()
        .map(|r| {
            let mut v: Vec<String> = encode_word_pieces(model, r.surface())
                .into_iter()
                .filter(|t| t.chars().count() >= cfg.min_token_len)
                .collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();

    let mut precisions = Vec::with_capacity(cfg.resamples);
    let mut recalls = Vec::with_capacity(cfg.resamples);
    let mut pairs_per_resample = 0;
    for _ in 0..cfg.resamples {
        let (mut a_and_b, mut a_only, mut b_only) = (0usize, 0usize, 0usize);
        pairs_per_resample = 0;
        for members in &clusters {
            let m = members.len();
            if m < 2 {
                continue;
            }
            let total = m * (m - 1) / 2;
            let take = cfg.pairs_per_cluster.min(total);
            for idx in rand::seq::index::sample(&mut rng, total, take).into_iter() {
                let (x, y) = pair_at(idx, m);
                let (x, y) = (members[x], members[y]);
                let a = shares(&morphs[x], &morphs[y]);
                let b = shares(&tokens[x], &tokens[y]);
                match (a, b) {
                    (true, true) => a_and_b += 1,
                    (true, false) => a_only += 1,
                    (false, true) => b_only += 1,
                    (false, false) => {}
                }
                pairs_per_resample += 1;
            }
        }
        if a_and_b + b_only > 0 {
            precisions.push(a_and_b as f64 / (a_and_b + b_only) as f64);
        }
        if a_and_b + a_only > 0 {
            recalls.push(a_and_b as f64 / (a_and_b + a_only) as f64);
        }
    }
    if precisions.is_empty() {
        return Err(Error::Undefined(
            "precision: no sampled pair shares a token in any resample".into(),
        ));
    }
    if recalls.is_empty() {
        return Err(Error::Undefined(
            "recall: no sampled pair shares a morpheme in any resample".into(),
        ));
    }
    let (pm, ps) = mean_std(&precisions);
    let (rm, rs) = mean_std(&recalls);
    Ok(ConsistencyReport {
        precision_mean: pm,
        precision_std: ps,
        recall_mean: rm,
        recall_std: rs,
        f1: f1(pm, rm),
        precision_resamples: precisions.len(),
        recall_resamples: recalls.len(),
        pairs_per_resample,
    })
}
