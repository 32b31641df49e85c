mod common;

use morphbpe::encoder::encode_word_pieces;
use morphbpe::metrics::{
    cluster_words, corpus_mu_e, f1, fertility, fertility_against, morph_consistency, morph_edit_distance,
    ConsistencyConfig, MuEOptions,
};
use morphbpe::{
    train, Error, MergeEvent, Mode, Normalization, SegmentationDataset, SegmentedWord, TokenizerModel,
    TrainConfig, WordFrequencyTable,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::recursive_edit;

fn seq() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(prop::sample::select(vec!["a", "b", "ab", "ba", "c"]), 0..7)
        .prop_map(|v| v.into_iter().map(String::from).collect())
}

proptest! {
    #[test]
    fn edit_distance_is_a_metric(a in seq(), b in seq(), c in seq()) {
        let d = |x: &[String], y: &[String]| morph_edit_distance(x, y);
        prop_assert_eq!(d(&a, &a), 0);
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert_eq!(d(&a, &b) == 0, a == b);
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c));
        prop_assert!(d(&a, &b) <= a.len().max(b.len()) as u32);
        prop_assert!(d(&a, &b) >= a.len().abs_diff(b.len()) as u32);
    }

    #[test]
    fn edit_distance_matches_recursion(a in seq(), b in seq()) {
        let ra: Vec<&str> = a.iter().map(String::as_str).collect();
        let rb: Vec<&str> = b.iter().map(String::as_str).collect();
        prop_assert_eq!(morph_edit_distance(&a, &b), recursive_edit(&ra, &rb));
    }

    #[test]
    fn f1_is_monotone(p in 0.0f64..1.0, r in 0.0f64..1.0, dp in 0.0f64..0.5) {
        let hi = (p + dp).min(1.0);
        prop_assert!(f1(hi, r) >= f1(p, r) - 1e-12);
        prop_assert!(f1(r, hi) >= f1(r, p) - 1e-12);
        prop_assert!(f1(p, r) <= p.max(r) + 1e-12 && f1(p, r) >= p.min(r) - 1e-12);
    }
}

fn model(vocab: &[&str], merges: &[(&str, &str)]) -> TokenizerModel {
    TokenizerModel::new(
        vocab.iter().map(|s| s.to_string()).collect(),
        merges
            .iter()
            .enumerate()
            .map(|(i, (l, r))| MergeEvent::new(l, r, i as u32, 1))
            .collect(),
        Mode::VanillaBpe,
        Normalization::Nfc,
    )
    .unwrap()
}

#[test]
fn fertility_of_character_model() {
    let m = model(&["<unk>", "a", "b", "c", "d"], &[]);
    let r = fertility(&m, "ab cd").unwrap();
    assert_eq!((r.token_count, r.word_count), (4, 2));
    assert_eq!(r.phi, 2.0);
    assert!(matches!(fertility(&m, " \n "), Err(Error::Empty(_))));
}

#[test]
fn fertility_of_whole_word_model_is_one() {
    let text = "the cat sat on the mat the end";
    let mut table = WordFrequencyTable::new();
    table.add_text(text);
    let m = train(
        &table,
        None,
        &TrainConfig::new(10_000, Mode::VanillaBpe).min_pair_frequency(1),
    )
    .unwrap()
    .model;
    assert_eq!(fertility(&m, text).unwrap().phi, 1.0);
    assert_eq!(fertility_against(&m, &m, "self", text).unwrap().phi, 1.0);
}

fn hand_model() -> TokenizerModel {
    model(
        &[
            "<unk>", "a", "e", "h", "n", "p", "s", "u", "y", "un", "ha", "hap", "happ", "es", "nes", "ness",
        ],
        &[
            ("u", "n"),
            ("h", "a"),
            ("ha", "p"),
            ("hap", "p"),
            ("e", "s"),
            ("n", "es"),
            ("nes", "s"),
        ],
    )
}

#[test]
fn fertility_hand_counted() {
    let m = hand_model();
    // unhappy -> un happ y (3), happiness -> happ i ness (3), sun -> s un (2),
    // yes -> y es (2), hay -> ha y (2), nun -> n un (2), a (1)
    let words = [
        ("unhappy", 3, 3),
        ("happiness", 2, 3),
        ("sun", 4, 2),
        ("yes", 5, 2),
        ("hay", 3, 2),
        ("nun", 2, 2),
        ("a", 1, 1),
    ];
    let mut text = String::new();
    for (w, n, _) in words {
        for _ in 0..n {
            text.push_str(w);
            text.push_str(" \n");
        }
    }
    for (w, _, t) in words {
        assert_eq!(encode_word_pieces(&m, w).len(), t, "{w}");
    }
    let r = fertility(&m, &text).unwrap();
    assert_eq!((r.token_count, r.word_count), (44, 20));
    assert!((r.phi - 2.2).abs() < 1e-12);

    let chars = model(&["<unk>", "a", "e", "h", "n", "p", "s", "u", "y"], &[]);
    let rel = fertility_against(&m, &chars, "chars", &text).unwrap();
    let char_count: u64 = words.iter().map(|(w, n, _)| (w.chars().count() * n) as u64).sum();
    assert_eq!(rel.baseline_count, char_count);
    assert!((rel.phi - 44.0 / char_count as f64).abs() < 1e-12);
}

#[test]
fn fertility_is_additive_over_line_chunks() {
    let m = train(
        &common::en_counts(),
        Some(&common::en_lexicon()),
        &TrainConfig::new(500, Mode::MorphBpe),
    )
    .unwrap()
    .model;
    let text: String = common::EN_COUNTS
        .lines()
        .map(|l| l.split('\t').next().unwrap())
        .collect::<Vec<_>>()
        .chunks(7)
        .map(|c| c.join(" ") + "\n")
        .collect();
    let whole = fertility(&m, &text).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    for chunk in [1, 13, 250] {
        let (mut t, mut w) = (0, 0);
        for part in lines.chunks(chunk) {
            let r = fertility(&m, &part.join("\n")).unwrap();
            t += r.token_count;
            w += r.word_count;
        }
        assert_eq!((t, w), (whole.token_count, whole.word_count));
    }
}

#[test]
fn corpus_mu_e_hand_counted() {
    let m = hand_model();
    let ds = SegmentationDataset::from_records(
        "en",
        "t",
        [
            SegmentedWord::new("unhappy", &["un", "happy"]).unwrap(),
            SegmentedWord::new("sun", &["sun"]).unwrap(),
            SegmentedWord::new("hay", &["hay"]).unwrap(),
        ],
    )
    .0;
    // [un happ y] vs [un happy]: 2; [s un] vs [sun]: 2; [ha y] vs [hay]: 2
    let r = corpus_mu_e(
        &m,
        &ds,
        MuEOptions {
            use_gold_boundaries: false,
            keep_per_word: true,
        },
    )
    .unwrap();
    assert_eq!(r.per_word.as_deref(), Some(&[2, 2, 2][..]));
    assert_eq!(r.mean_mu_e, 2.0);
    let g = corpus_mu_e(
        &m,
        &ds,
        MuEOptions {
            use_gold_boundaries: true,
            keep_per_word: false,
        },
    )
    .unwrap();
    assert_eq!(g.mean_mu_e, 2.0);
    assert!(g.per_word.is_none());
}

/// Words built from morphemes with pairwise disjoint alphabets, so sharing
/// a token and sharing a morpheme coincide.
fn disjoint_dataset(seed: u64) -> SegmentationDataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let morphemes: Vec<String> = (0..15u32)
        .map(|i| {
            let base = 0x400 + 4 * i;
            (0..rng.random_range(1..=4))
                .map(|j| char::from_u32(base + j).unwrap())
                .collect()
        })
        .collect();
    let mut records = Vec::new();
    for _ in 0..200 {
        let n = rng.random_range(1..=3);
        let mut parts: Vec<&str> = Vec::new();
        while parts.len() < n {
            let m = morphemes[rng.random_range(0..morphemes.len())].as_str();
            if !parts.contains(&m) {
                parts.push(m);
            }
        }
        records.push(SegmentedWord::new(&parts.concat(), &parts).unwrap());
    }
    SegmentationDataset::from_records("xx", "t", records).0
}

fn small_cfg(seed: u64) -> ConsistencyConfig {
    ConsistencyConfig {
        k: 6,
        pairs_per_cluster: 20,
        resamples: 5,
        seed,
        ..ConsistencyConfig::default()
    }
}

#[test]
fn morpheme_exact_tokenizer_is_fully_consistent() {
    let ds = disjoint_dataset(1);
    let mut table = WordFrequencyTable::new();
    for r in ds.records() {
        table.add(r.surface(), 1).unwrap();
    }
    let m = train(
        &table,
        Some(&ds),
        &TrainConfig::new(10_000, Mode::MorphBpe).min_pair_frequency(1),
    )
    .unwrap()
    .model;
    for r in ds.records() {
        assert_eq!(encode_word_pieces(&m, r.surface()), r.morphemes());
    }
    let rep = morph_consistency(&m, &ds, &small_cfg(3)).unwrap();
    assert_eq!((rep.precision_mean, rep.recall_mean, rep.f1), (1.0, 1.0, 1.0));
    assert_eq!((rep.precision_std, rep.recall_std), (0.0, 0.0));
}

/// Precision and recall over every within-cluster pair.
fn exhaustive(model: &TokenizerModel, ds: &SegmentationDataset, cfg: &ConsistencyConfig) -> (f64, f64) {
    let clusters = cluster_words(ds, cfg).unwrap().members();
    let recs = ds.records();
    let (mut ab, mut a, mut b) = (0u64, 0u64, 0u64);
    for members in clusters {
        for (i, &x) in members.iter().enumerate() {
            for &y in &members[i + 1..] {
                let sa = recs[x]
                    .morphemes()
                    .iter()
                    .any(|m| recs[y].morphemes().contains(m));
                let tx = encode_word_pieces(model, recs[x].surface());
                let ty = encode_word_pieces(model, recs[y].surface());
                let sb = tx
                    .iter()
                    .any(|t| t.chars().count() >= cfg.min_token_len && ty.contains(t));
                ab += u64::from(sa && sb);
                a += u64::from(sa);
                b += u64::from(sb);
            }
        }
    }
    (ab as f64 / b as f64, ab as f64 / a as f64)
}

#[test]
fn full_sampling_equals_exhaustive_oracle() {
    let lex = common::en_lexicon();
    let subset = SegmentationDataset::from_records("en", "t", lex.records().iter().step_by(100).cloned()).0;
    assert_eq!(subset.len(), 300);
    for (mode, size, min_len) in [
        (Mode::VanillaBpe, 300, 1),
        (Mode::MorphBpe, 500, 1),
        (Mode::VanillaBpe, 500, 3),
    ] {
        let m = train(&common::en_counts(), Some(&lex), &TrainConfig::new(size, mode))
            .unwrap()
            .model;
        let cfg = ConsistencyConfig {
            k: 8,
            pairs_per_cluster: 1_000_000,
            resamples: 3,
            seed: 5,
            min_token_len: min_len,
            ..ConsistencyConfig::default()
        };
        let rep = morph_consistency(&m, &subset, &cfg).unwrap();
        let (p, r) = exhaustive(&m, &subset, &cfg);
        assert!(
            (rep.precision_mean - p).abs() < 1e-12,
            "{mode}: {} vs {p}",
            rep.precision_mean
        );
        assert!(
            (rep.recall_mean - r).abs() < 1e-12,
            "{mode}: {} vs {r}",
            rep.recall_mean
        );
        assert!(rep.precision_std < 1e-12 && rep.recall_std < 1e-12);
    }
}

#[test]
fn consistency_is_deterministic_per_seed() {
    let lex = common::en_lexicon();
    let subset = SegmentationDataset::from_records("en", "t", lex.records().iter().step_by(50).cloned()).0;
    let m = train(
        &common::en_counts(),
        Some(&lex),
        &TrainConfig::new(400, Mode::VanillaBpe),
    )
    .unwrap()
    .model;
    let cfg = ConsistencyConfig {
        k: 20,
        pairs_per_cluster: 10,
        ..ConsistencyConfig::default()
    };
    let a = serde_json::to_string(&morph_consistency(&m, &subset, &cfg).unwrap()).unwrap();
    let b = serde_json::to_string(&morph_consistency(&m, &subset, &cfg).unwrap()).unwrap();
    assert_eq!(a, b);
    let other = ConsistencyConfig { seed: 1, ..cfg };
    let c = serde_json::to_string(&morph_consistency(&m, &subset, &other).unwrap()).unwrap();
    assert_ne!(a, c);
    let rep = morph_consistency(&m, &subset, &cfg).unwrap();
    assert!(rep.precision_std > 0.0 && rep.precision_resamples == 10);
}
