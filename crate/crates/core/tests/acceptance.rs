//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.
#![allow(clippy::excessive_precision)]

mod common;

use std::collections::BTreeSet;
use std::panic::{self, AssertUnwindSafe};
use std::time::{Duration, Instant};

use morphbpe::ingest::{split_dataset, SplitSpec};
use morphbpe::metrics::{
    corpus_mu_e, f1, fertility, morph_consistency, morph_edit_distance, ConsistencyConfig, MuEOptions,
};
use morphbpe::stats::student_t_two_sided;
use morphbpe::vocab_select::{sweep, SweepConfig};
use morphbpe::{
    encode_segmented, train, Mode, SegmentationDataset, SegmentedWord, TokenizerModel, TrainConfig,
    WordFrequencyTable,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{
    char_spans, oracle_train, random_corpus, random_segmentation, recursive_edit, table_and_lexicon,
};

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let took = start.elapsed();
    ensure(took <= limit, || format!("took {took:.1?}, limit {limit:?}"))
}

fn trainer_oracle() -> Result<String, String> {
    let start = Instant::now();
    let mut merges = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0xacc0 + seed);
        let corpus = random_corpus(&mut rng, 50, 10);
        let (table, lex) = table_and_lexicon(&corpus);
        let alphabet: BTreeSet<char> = corpus.iter().flat_map(|(w, _)| w.surface().chars()).collect();
        let target = alphabet.len() + 1 + rng.random_range(1..80);
        for mode in [Mode::VanillaBpe, Mode::MorphBpe] {
            let cfg = TrainConfig::new(target, mode).min_pair_frequency(rng.random_range(1..=2));
            let got: Vec<(String, String, u64)> = train(&table, Some(&lex), &cfg)
                .map_err(|e| e.to_string())?
                .model
                .merges()
                .iter()
                .map(|m| (m.left.clone(), m.right.clone(), m.frequency))
                .collect();
            let words: Vec<_> = corpus
                .iter()
                .map(|(w, c)| match mode {
                    Mode::MorphBpe => (char_spans(w.morphemes()), *c),
                    Mode::VanillaBpe => (char_spans(&[w.surface().to_owned()]), *c),
                })
                .collect();
            let want = oracle_train(&words, target, cfg.min_pair_frequency);
            ensure(got == want, || format!("seed {seed} {mode}: sequences differ"))?;
            merges += got.len();
        }
    }
    within(start, Duration::from_secs(60))?;
    Ok(format!("200 runs, {merges} merge events identical"))
}

fn boundary_safety() -> Result<String, String> {
    let start = Instant::now();
    let model = train(
        &common::en_counts(),
        Some(&common::en_lexicon()),
        &TrainConfig::new(600, Mode::MorphBpe),
    )
    .map_err(|e| e.to_string())?
    .model;
    let letters: Vec<char> = model.vocab()[1..=model.alphabet_size()]
        .iter()
        .map(|t| t.chars().next().unwrap())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0xb0);
    let lex = common::en_lexicon();
    let mut crossings = 0;
    for i in 0..1000 {
        // half real words under random segmentations, half random strings
        let word: String = if i % 2 == 0 {
            lex.records()[rng.random_range(0..lex.len())].surface().to_owned()
        } else {
            (0..rng.random_range(1..=14))
                .map(|_| letters[rng.random_range(0..letters.len())])
                .collect()
        };
        let sw = random_segmentation(&mut rng, &word);
        let bounds = sw.boundaries();
        let mut pos = 0;
        for id in encode_segmented(&model, &sw) {
            let len = if id == morphbpe::UNK_ID {
                1
            } else {
                model.token(id).unwrap().chars().count()
            };
            if bounds.iter().any(|&b| pos < b && b < pos + len) {
                crossings += 1;
            }
            pos += len;
        }
        ensure(pos == word.chars().count(), || {
            format!("{word}: tokens do not cover the word")
        })?;
    }
    ensure(crossings == 0, || format!("{crossings} tokens cross a boundary"))?;
    within(start, Duration::from_secs(10))?;
    Ok("1000 words, 0 crossing tokens".into())
}

fn mode_reduction() -> Result<String, String> {
    let mut merges = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(0x40 + seed);
        let corpus = random_corpus(&mut rng, 50, 8);
        let (table, _) = table_and_lexicon(&corpus);
        let mono = SegmentationDataset::from_records(
            "xx",
            "mono",
            corpus
                .iter()
                .map(|(w, _)| SegmentedWord::monomorphemic(w.surface()).unwrap()),
        )
        .0;
        let cfg = |mode| TrainConfig::new(300, mode).min_pair_frequency(1);
        let v = train(&table, None, &cfg(Mode::VanillaBpe))
            .map_err(|e| e.to_string())?
            .model;
        let m = train(&table, Some(&mono), &cfg(Mode::MorphBpe))
            .map_err(|e| e.to_string())?
            .model;
        ensure(v.merges() == m.merges() && v.vocab() == m.vocab(), || {
            format!("seed {seed} differs")
        })?;
        merges += v.merges().len();
    }
    Ok(format!("20 corpora, {merges} merges identical"))
}

fn mu_e_correctness() -> Result<String, String> {
    let start = Instant::now();
    let alphabet = ["ab", "c", "abc"];
    let mut all: Vec<Vec<&str>> = vec![vec![]];
    let mut frontier = all.clone();
    for _ in 0..4 {
        frontier = frontier
            .iter()
            .flat_map(|s| alphabet.iter().map(move |a| [s.clone(), vec![*a]].concat()))
            .collect();
        all.extend(frontier.iter().cloned());
    }
    let mut cases = 0;
    for a in &all {
        for b in &all {
            let (dp, rec) = (morph_edit_distance(a, b), recursive_edit(a, b));
            ensure(dp == rec, || format!("{a:?} vs {b:?}: {dp} != {rec}"))?;
            cases += 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xed);
    for _ in 0..5000 {
        let mut draw = || -> Vec<&str> {
            (0..rng.random_range(0..=6))
                .map(|_| alphabet[rng.random_range(0..3)])
                .collect()
        };
        let (a, b) = (draw(), draw());
        let (dp, rec) = (morph_edit_distance(&a, &b), recursive_edit(&a, &b));
        ensure(dp == rec, || format!("{a:?} vs {b:?}: {dp} != {rec}"))?;
        cases += 1;
    }
    within(start, Duration::from_secs(30))?;
    Ok(format!("{cases} pairs"))
}

fn f1_arithmetic() -> Result<String, String> {
    let rows = [
        (0.98, 0.78, 0.87),
        (0.89, 0.53, 0.66),
        (0.69, 0.33, 0.45),
        (0.20, 0.30, 0.24),
    ];
    let mut got = Vec::new();
    for (p, r, want) in rows {
        let v = f1(p, r);
        ensure((v - want).abs() <= 0.005, || {
            format!("f1({p}, {r}) = {v:.4}, want {want}")
        })?;
        got.push(format!("{v:.3}"));
    }
    Ok(got.join(" "))
}

/// Each word of the count table repeated by its count, in table order.
fn weighted_text(counts: &WordFrequencyTable) -> String {
    let mut s = String::new();
    for (w, c) in counts.iter() {
        for _ in 0..c {
            s.push_str(w);
            s.push(' ');
        }
    }
    s
}

fn directional() -> Result<String, String> {
    let start = Instant::now();
    let counts = common::en_counts();
    let lex = common::en_lexicon();
    ensure(lex.len() >= 5000, || format!("lexicon has {} words", lex.len()))?;
    let split = split_dataset(&lex, &SplitSpec::standard(0)).map_err(|e| e.to_string())?;
    // vocabulary size chosen by the dev-set sweep, scored on the test set
    let sizes: Vec<usize> = (1..=14).map(|k| 200 * k).collect();
    let selected = sweep(
        &counts,
        Some(&split.train),
        &split.dev,
        &SweepConfig::new(Mode::MorphBpe, sizes),
    )
    .map_err(|e| e.to_string())?
    .selected_size;
    let text = weighted_text(&counts);
    let mut rows = Vec::new();
    for mode in [Mode::VanillaBpe, Mode::MorphBpe] {
        let out = train(&counts, Some(&split.train), &TrainConfig::new(selected, mode))
            .map_err(|e| e.to_string())?;
        ensure(out.reached_target, || {
            format!("{mode} stopped at {}", out.model.vocab_size())
        })?;
        let m = out.model;
        let mu_e = corpus_mu_e(&m, &split.test, MuEOptions::default())
            .map_err(|e| e.to_string())?
            .mean_mu_e;
        let mu_c = morph_consistency(&m, &split.test, &ConsistencyConfig::default())
            .map_err(|e| e.to_string())?
            .f1;
        let phi = fertility(&m, &text).map_err(|e| e.to_string())?.phi;
        rows.push((mu_e, mu_c, phi));
    }
    let ((be, bc, bp), (me, mc, mp)) = (rows[0], rows[1]);
    let detail = format!(
        "vocab {selected}, {} test words: mu_e {be:.3} -> {me:.3}, F1 {bc:.3} -> {mc:.3}, phi {bp:.3} -> {mp:.3}",
        split.test.len()
    );
    ensure(me < be && mc > bc && mp >= bp, || detail.clone())?;
    within(start, Duration::from_secs(300))?;
    Ok(detail)
}

fn fertility_baseline() -> Result<String, String> {
    let text = "the cat sat on the mat and the dog ran off";
    let mut table = WordFrequencyTable::new();
    table.add_text(text);
    let whole = train(
        &table,
        None,
        &TrainConfig::new(10_000, Mode::VanillaBpe).min_pair_frequency(1),
    )
    .map_err(|e| e.to_string())?
    .model;
    let phi = fertility(&whole, text).map_err(|e| e.to_string())?.phi;
    ensure(phi == 1.0, || format!("whole-word phi {phi}"))?;

    // merges a+b, then ab+c; hand-counted tokens per word
    let m = TokenizerModel::new(
        ["<unk>", "a", "b", "c", "ab", "abc"].map(String::from).to_vec(),
        vec![
            morphbpe::MergeEvent::new("a", "b", 0, 1),
            morphbpe::MergeEvent::new("ab", "c", 1, 1),
        ],
        Mode::VanillaBpe,
        morphbpe::Normalization::Nfc,
    )
    .map_err(|e| e.to_string())?;
    let words = [
        ("abc", 1),
        ("ab", 1),
        ("a", 1),
        ("cab", 2),
        ("abab", 2),
        ("cba", 3),
        ("abcabc", 2),
        ("bca", 3),
        ("aaa", 3),
        ("abcc", 2),
        ("x", 1),
        ("abx", 2),
        ("ba", 2),
        ("cc", 2),
        ("ccab", 3),
        ("abcab", 2),
        ("b", 1),
        ("c", 1),
        ("bab", 2),
        ("acb", 3),
    ];
    let text: String = words.iter().map(|(w, _)| format!("{w} ")).collect();
    let hand: usize = words.iter().map(|(_, n)| n).sum();
    let r = fertility(&m, &text).map_err(|e| e.to_string())?;
    let want = hand as f64 / 20.0;
    ensure(r.word_count == 20 && r.phi == want, || {
        format!("phi {} vs hand {want}", r.phi)
    })?;
    Ok(format!("whole-word phi 1.0, 20-word fixture {hand}/20 = {want}"))
}

fn run_once(dir: &std::path::Path, tag: &str) -> Result<(Vec<u8>, Vec<u8>), String> {
    let counts = common::en_counts();
    let lex = common::en_lexicon();
    let model = train(&counts, Some(&lex), &TrainConfig::new(500, Mode::MorphBpe))
        .map_err(|e| e.to_string())?
        .model;
    let mp = dir.join(format!("model-{tag}.json"));
    morphbpe::save_model(&model, &mp).map_err(|e| e.to_string())?;
    let loaded = morphbpe::load_model(&mp).map_err(|e| e.to_string())?;
    let cfg = ConsistencyConfig {
        seed: 17,
        ..ConsistencyConfig::default()
    };
    let report = morph_consistency(&loaded, &lex, &cfg).map_err(|e| e.to_string())?;
    let rp = dir.join(format!("report-{tag}.json"));
    std::fs::write(&rp, serde_json::to_vec(&report).unwrap()).map_err(|e| e.to_string())?;
    Ok((std::fs::read(mp).unwrap(), std::fs::read(rp).unwrap()))
}

fn determinism() -> Result<String, String> {
    let dir = std::env::temp_dir().join(format!("morphbpe-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let a = run_once(&dir, "a");
    let b = run_once(&dir, "b");
    let _ = std::fs::remove_dir_all(&dir);
    let (a, b) = (a?, b?);
    ensure(a.0 == b.0, || "model files differ".into())?;
    ensure(a.1 == b.1, || "consistency reports differ".into())?;
    Ok(format!(
        "model {} bytes, report {} bytes identical",
        a.0.len(),
        a.1.len()
    ))
}

fn sweep_behavior() -> Result<String, String> {
    let counts = common::en_counts();
    let lex = common::en_lexicon();
    let mono = |words: Vec<String>| {
        SegmentationDataset::from_records(
            "en",
            "dev",
            words.iter().map(|w| SegmentedWord::monomorphemic(w).unwrap()),
        )
        .0
    };
    let flat = mono("abcdefghij".chars().map(String::from).collect());
    let r = sweep(
        &counts,
        Some(&lex),
        &flat,
        &SweepConfig::new(Mode::MorphBpe, vec![100, 200, 300]),
    )
    .map_err(|e| e.to_string())?;
    ensure(r.selected_size == 100, || {
        format!("flat curve selected {}", r.selected_size)
    })?;

    let frequent = mono(
        counts
            .iter()
            .filter(|(_, c)| *c >= 20)
            .map(|(w, _)| w.to_owned())
            .collect(),
    );
    let r = sweep(
        &counts,
        None,
        &frequent,
        &SweepConfig::new(Mode::VanillaBpe, vec![60, 150, 400, 800]),
    )
    .map_err(|e| e.to_string())?;
    ensure(r.selected_size == 800, || {
        format!("improving curve selected {}", r.selected_size)
    })?;

    let refs = [
        (2.0, 10.0, 0.073388034770740365618),
        (0.5, 3.0, 0.65144796484815099444),
        (3.7, 25.0, 0.001065910494874309516),
        (5.2, 4.0, 0.0065161459745783719309),
        (-2.5, 7.0, 0.040992218585752896889),
    ];
    let mut worst: f64 = 0.0;
    for (t, df, p) in refs {
        let got = student_t_two_sided(t, df);
        worst = worst.max((got - p).abs());
        ensure((got - p).abs() < 1e-6, || {
            format!("t={t} df={df}: p {got} vs {p}")
        })?;
    }
    Ok(format!("flat -> 100, improving -> 800, max p error {worst:.1e}"))
}

fn main() {
    let checks: [(&str, Check); 9] = [
        ("trainer oracle equivalence", trainer_oracle),
        ("boundary safety", boundary_safety),
        ("mode reduction", mode_reduction),
        ("edit distance correctness", mu_e_correctness),
        ("F1 arithmetic", f1_arithmetic),
        ("directional replication", directional),
        ("fertility baseline", fertility_baseline),
        ("determinism", determinism),
        ("sweep behavior", sweep_behavior),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, check) in checks {
        let start = Instant::now();
        let outcome = panic::catch_unwind(AssertUnwindSafe(check))
            .unwrap_or_else(|e| Err(format!("panicked: {:?}", e.downcast_ref::<String>())));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name:<28} {detail} ({secs:.2}s)"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name:<28} {why} ({secs:.2}s)");
            }
        }
    }
    println!("{} of {} criteria pass", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
