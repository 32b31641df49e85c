//! BPE merge learning, optionally confined to morpheme spans.
//!
//! Every corpus word is held as a list of spans. In vanilla mode a word is one
//! span; in morph mode each gold morpheme is its own span. Pairs are only ever
//! counted and merged inside a span, so in morph mode no learned token can
//! straddle a morpheme boundary of a training word.
//!
//! Pair counts are maintained incrementally. An index maps each pair to the
//! spans it may occur in (entries go stale and are filtered on use), and a
//! lazy max-heap keyed on `(count, pair)` yields the next merge. A merge only
//! touches the spans that contain its pair.

use std::cmp::Ordering;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet};
use std::rc::Rc;

use crate::error::{Error, Result};
use crate::ingest::SegmentationDataset;
use crate::model::{MergeEvent, Mode, Normalization, TokenizerModel, UNK_TOKEN};
use crate::types::WordFrequencyTable;

type Sym = u32;
type Pair = (Sym, Sym);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrainConfig {
    /// Specials + distinct characters + merged tokens.
    pub target_vocab_size: usize,
    pub mode: Mode,
    pub min_pair_frequency: u64,
}

impl TrainConfig {
    pub fn new(target_vocab_size: usize, mode: Mode) -> Self {
        TrainConfig {
            target_vocab_size,
            mode,
            min_pair_frequency: 2,
        }
    }

    pub fn min_pair_frequency(mut self, min: u64) -> Self {
        self.min_pair_frequency = min;
        self
    }
}

/// Training result. When the merge loop ran out of pairs above the minimum
/// frequency before reaching the target, `reached_target` is false and the
/// model is still usable.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: TokenizerModel,
    pub reached_target: bool,
}

/// Emitted every 1000 merges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Progress {
    pub rank: u32,
    pub left: String,
    pub right: String,
    pub frequency: u64,
    pub vocab_size: usize,
}

#[derive(Debug, Clone, Default)]
struct SymbolTable {
    strings: Vec<Rc<str>>,
    ids: HashMap<Rc<str>, Sym>,
}

impl SymbolTable {
    fn intern(&mut self, s: &str) -> (Sym, bool) {
        if let Some(&id) = self.ids.get(s) {
            return (id, false);
        }
        let id = self.strings.len() as Sym;
        let rc: Rc<str> = Rc::from(s);
        self.strings.push(rc.clone());
        self.ids.insert(rc, id);
        (id, true)
    }

    fn get(&self, s: &str) -> Option<Sym> {
        self.ids.get(s).copied()
    }

    fn str(&self, id: Sym) -> &Rc<str> {
        &self.strings[id as usize]
    }
}

#[derive(Debug, Clone)]
struct Span {
    word: u32,
    symbols: Vec<Sym>,
}

#[derive(Debug, Clone)]
struct ViewWord {
    surface: String,
    count: u64,
    spans: std::ops::Range<usize>,
}

/// The training corpus as words split into spans of current symbols.
#[derive(Debug, Clone)]
pub struct SegmentedCorpusView {
    table: SymbolTable,
    words: Vec<ViewWord>,
    spans: Vec<Span>,
}

impl SegmentedCorpusView {
    /// Builds the view. In morph mode each word found in `lexicon` is split
    /// into its morphemes; words the lexicon lacks stay whole.
    pub fn new(
        words: &WordFrequencyTable,
        lexicon: Option<&SegmentationDataset>,
        mode: Mode,
    ) -> Result<Self> {
        let index = match (mode, lexicon) {
            (Mode::MorphBpe, Some(lex)) => Some(lex.index()),
            (Mode::MorphBpe, None) => {
                return Err(Error::Config(
                    "morph-bpe training needs a segmentation lexicon".into(),
                ))
            }
            (Mode::VanillaBpe, _) => None,
        };

        let chars: BTreeSet<char> = words.iter().flat_map(|(w, _)| w.chars()).collect();
        let mut table = SymbolTable::default();
        let mut buf = [0u8; 4];
        for c in &chars {
            table.intern(c.encode_utf8(&mut buf));
        }
        let char_id = |c: char| -> Sym {
            let mut b = [0u8; 4];
            table.get(c.encode_utf8(&mut b)).expect("interned above")
        };

        let mut view_words = Vec::with_capacity(words.len());
        let mut spans = Vec::new();
        for (wi, (surface, count)) in words.iter().enumerate() {
            let start = spans.len();
            let morphemes = index
                .as_ref()
                .and_then(|ix| ix.get(surface))
                .map(|r| r.morphemes());
            match morphemes {
                Some(ms) => {
                    for m in ms {
                        spans.push(Span {
                            word: wi as u32,
                            symbols: m.chars().map(char_id).collect(),
                        });
                    }
                }
                None => spans.push(Span {
                    word: wi as u32,
                    symbols: surface.chars().map(char_id).collect(),
                }),
            }
            view_words.push(ViewWord {
                surface: surface.to_owned(),
                count,
                spans: start..spans.len(),
            });
        }
        Ok(SegmentedCorpusView {
            table,
            words: view_words,
            spans,
        })
    }

    /// Current symbols of `word`, one list per span. `None` if the word is
    /// not in the corpus.
    pub fn word_spans(&self, word: &str) -> Option<Vec<Vec<String>>> {
        let i = self
            .words
            .binary_search_by(|w| w.surface.as_str().cmp(word))
            .ok()?;
        Some(
            self.spans[self.words[i].spans.clone()]
                .iter()
                .map(|s| s.symbols.iter().map(|&x| self.table.str(x).to_string()).collect())
                .collect(),
        )
    }

    /// Every word with its current span symbols.
    pub fn iter_words(&self) -> impl Iterator<Item = (&str, u64, Vec<Vec<String>>)> + '_ {
        self.words.iter().map(|w| {
            let spans = self.spans[w.spans.clone()]
                .iter()
                .map(|s| s.symbols.iter().map(|&x| self.table.str(x).to_string()).collect())
                .collect();
            (w.surface.as_str(), w.count, spans)
        })
    }

    fn weight(&self, span: usize) -> u64 {
        self.words[self.spans[span].word as usize].count
    }

    /// Adjacent pair counts inside spans, weighted by word frequency.
    pub fn pair_frequencies(&self) -> HashMap<(String, String), u64> {
        self.pair_counts_by_id()
            .into_iter()
            .map(|((a, b), c)| ((self.table.str(a).to_string(), self.table.str(b).to_string()), c))
            .collect()
    }

    fn pair_counts_by_id(&self) -> HashMap<Pair, u64> {
        let mut counts = HashMap::new();
        for (i, span) in self.spans.iter().enumerate() {
            let w = self.weight(i);
            for p in span.symbols.windows(2) {
                *counts.entry((p[0], p[1])).or_insert(0) += w;
            }
        }
        counts
    }

    /// Replaces every occurrence of `left right` inside spans, scanning left
    /// to right, and returns the resulting change in pair counts. An absent
    /// pair is a no-op with an empty delta.
    pub fn apply_merge(&mut self, left: &str, right: &str) -> HashMap<(String, String), i64> {
        let (Some(l), Some(r)) = (self.table.get(left), self.table.get(right)) else {
            return HashMap::new();
        };
        let merged = self.table.intern(&format!("{left}{right}")).0;
        let spans: Vec<usize> = (0..self.spans.len()).collect();
        let mut delta = HashMap::new();
        self.merge_in_spans((l, r), merged, &spans, &mut delta, |_, _| {});
        delta
            .into_iter()
            .filter(|&(_, d)| d != 0)
            .map(|((a, b), d)| ((self.table.str(a).to_string(), self.table.str(b).to_string()), d))
            .collect()
    }

    /// Merges `pair` into `merged` within the given spans. Pair-count changes
    /// accumulate into `delta`; `on_new_pair` sees each (pair, span) whose
    /// pair involves the merged symbol.
    fn merge_in_spans(
        &mut self,
        pair: Pair,
        merged: Sym,
        spans: &[usize],
        delta: &mut HashMap<Pair, i64>,
        mut on_new_pair: impl FnMut(Pair, usize),
    ) {
        for &si in spans {
            let w = self.weight(si) as i64;
            let syms = &mut self.spans[si].symbols;
            if !syms.windows(2).any(|p| (p[0], p[1]) == pair) {
                continue;
            }
            for p in syms.windows(2) {
                *delta.entry((p[0], p[1])).or_insert(0) -= w;
            }
            let mut out = Vec::with_capacity(syms.len());
            let mut i = 0;
            while i < syms.len() {
                if i + 1 < syms.len() && (syms[i], syms[i + 1]) == pair {
                    out.push(merged);
                    i += 2;
                } else {
                    out.push(syms[i]);
                    i += 1;
                }
            }
            *syms = out;
            for p in syms.windows(2) {
                *delta.entry((p[0], p[1])).or_insert(0) += w;
                if p[0] == merged || p[1] == merged {
                    on_new_pair((p[0], p[1]), si);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Candidate {
    count: u64,
    left: Rc<str>,
    right: Rc<str>,
    pair: Pair,
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        // Highest count first; among equal counts the lexicographically
        // smallest (left, right) wins.
        self.count
            .cmp(&other.count)
            .then_with(|| other.left.cmp(&self.left))
            .then_with(|| other.right.cmp(&self.right))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Stateful merge learner. Most callers want [`train`].
pub struct Trainer {
    cfg: TrainConfig,
    view: SegmentedCorpusView,
    alphabet: Vec<Sym>,
    counts: HashMap<Pair, u64>,
    occurrences: HashMap<Pair, Vec<u32>>,
    heap: BinaryHeap<Candidate>,
    banned: HashSet<Pair>,
    merges: Vec<MergeEvent>,
    // merged tokens in order of first introduction
    introduced: Vec<Sym>,
    vocab_len: usize,
}

impl Trainer {
    pub fn new(
        words: &WordFrequencyTable,
        lexicon: Option<&SegmentationDataset>,
        cfg: TrainConfig,
    ) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::Empty("training corpus"));
        }
        if cfg.min_pair_frequency == 0 {
            return Err(Error::Config("min_pair_frequency must be at least 1".into()));
        }
        let view = SegmentedCorpusView::new(words, lexicon, cfg.mode)?;
        let alphabet: Vec<Sym> = (0..view.table.strings.len() as Sym).collect();
        let base = 1 + alphabet.len();
        if cfg.target_vocab_size <= base {
            return Err(Error::Config(format!(
                "target vocabulary size {} must exceed {} (<unk> + {} characters)",
                cfg.target_vocab_size,
                base,
                alphabet.len()
            )));
        }

        let counts = view.pair_counts_by_id();
        let mut occurrences: HashMap<Pair, Vec<u32>> = HashMap::new();
        for (si, span) in view.spans.iter().enumerate() {
            for p in span.symbols.windows(2) {
                let v = occurrences.entry((p[0], p[1])).or_default();
                if v.last() != Some(&(si as u32)) {
                    v.push(si as u32);
                }
            }
        }
        let mut t = Trainer {
            cfg,
            view,
            alphabet,
            counts,
            occurrences,
            heap: BinaryHeap::new(),
            banned: HashSet::new(),
            merges: Vec::new(),
            introduced: Vec::new(),
            vocab_len: base,
        };
        let initial: Vec<(Pair, u64)> = t.counts.iter().map(|(&p, &c)| (p, c)).collect();
        t.heap.reserve(initial.len());
        for (p, c) in initial {
            t.push(p, c);
        }
        Ok(t)
    }

    fn push(&mut self, pair: Pair, count: u64) {
        self.heap.push(Candidate {
            count,
            left: self.view.table.str(pair.0).clone(),
            right: self.view.table.str(pair.1).clone(),
            pair,
        });
    }

    fn done(&self) -> bool {
        self.vocab_len >= self.cfg.target_vocab_size
    }

    /// Learns one merge. Returns `None` once the target is reached or no
    /// pair meets the minimum frequency.
    pub fn step(&mut self) -> Option<&MergeEvent> {
        if self.done() {
            return None;
        }
        let best = loop {
            let cand = self.heap.pop()?;
            if self.counts.get(&cand.pair) != Some(&cand.count) || self.banned.contains(&cand.pair) {
                continue;
            }
            if cand.count < self.cfg.min_pair_frequency {
                // Everything left is smaller.
                self.heap.push(cand);
                return None;
            }
            if cand.left.len() + cand.right.len() == UNK_TOKEN.len()
                && format!("{}{}", cand.left, cand.right) == UNK_TOKEN
            {
                // Never learn the reserved string.
                self.banned.insert(cand.pair);
                continue;
            }
            break cand;
        };

        let merged_str = format!("{}{}", best.left, best.right);
        let (merged, fresh) = self.view.table.intern(&merged_str);
        let mut spans: Vec<u32> = self.occurrences.remove(&best.pair).unwrap_or_default();
        spans.sort_unstable();
        spans.dedup();
        let spans: Vec<usize> = spans.into_iter().map(|s| s as usize).collect();

        let mut delta: HashMap<Pair, i64> = HashMap::new();
        let mut new_pairs: Vec<(Pair, usize)> = Vec::new();
        self.view
            .merge_in_spans(best.pair, merged, &spans, &mut delta, |p, s| {
                new_pairs.push((p, s))
            });
        for (p, s) in new_pairs {
            let v = self.occurrences.entry(p).or_default();
            if v.last() != Some(&(s as u32)) {
                v.push(s as u32);
            }
        }

        // Heap order is total over (count, left, right), so the order of
        // these pushes does not affect which merge comes next.
        for (p, d) in delta.into_iter().filter(|&(_, d)| d != 0) {
            let c = self.counts.entry(p).or_insert(0);
            let next = (*c as i64 + d) as u64;
            debug_assert!(*c as i64 + d >= 0, "negative pair count");
            if next == 0 {
                self.counts.remove(&p);
                self.occurrences.remove(&p);
            } else {
                *c = next;
                self.push(p, next);
            }
        }

        if fresh {
            self.vocab_len += 1;
            self.introduced.push(merged);
        }
        let rank = self.merges.len() as u32;
        self.merges
            .push(MergeEvent::new(&best.left, &best.right, rank, best.count));
        self.merges.last()
    }

    /// Runs to completion, reporting progress every 1000 merges.
    pub fn run(&mut self, mut progress: impl FnMut(&Progress)) {
        while let Some(m) = self.step() {
            if (m.rank + 1) % 1000 == 0 {
                let p = Progress {
                    rank: m.rank,
                    left: m.left.clone(),
                    right: m.right.clone(),
                    frequency: m.frequency,
                    vocab_size: self.vocab_len,
                };
                progress(&p);
            }
        }
    }

    pub fn merges(&self) -> &[MergeEvent] {
        &self.merges
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_len
    }

    pub fn view(&self) -> &SegmentedCorpusView {
        &self.view
    }

    /// Current (delta-maintained) pair counts, keyed by strings.
    pub fn pair_counts(&self) -> HashMap<(String, String), u64> {
        self.counts
            .iter()
            .map(|(&(a, b), &c)| {
                let t = &self.view.table;
                ((t.str(a).to_string(), t.str(b).to_string()), c)
            })
            .collect()
    }

    pub fn into_outcome(self) -> TrainOutcome {
        let t = &self.view.table;
        let mut vocab = Vec::with_capacity(self.vocab_len);
        vocab.push(UNK_TOKEN.to_owned());
        vocab.extend(self.alphabet.iter().map(|&s| t.str(s).to_string()));
        vocab.extend(self.introduced.iter().map(|&s| t.str(s).to_string()));
        let reached_target = self.done();
        let model = TokenizerModel::new(vocab, self.merges, self.cfg.mode, Normalization::Nfc)
            .expect("trainer output satisfies model invariants");
        TrainOutcome {
            model,
            reached_target,
        }
    }
}

/// Learns a merge table from word counts.
///
/// `lexicon` is required in morph mode and ignored in vanilla mode.
pub fn train(
    words: &WordFrequencyTable,
    lexicon: Option<&SegmentationDataset>,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    train_with_progress(words, lexicon, cfg, |_| {})
}

pub fn train_with_progress(
    words: &WordFrequencyTable,
    lexicon: Option<&SegmentationDataset>,
    cfg: &TrainConfig,
    progress: impl FnMut(&Progress),
) -> Result<TrainOutcome> {
    let mut t = Trainer::new(words, lexicon, cfg.clone())?;
    t.run(progress);
    Ok(t.into_outcome())
}
