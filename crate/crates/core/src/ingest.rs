//! Segmentation lexicons, corpus word counts and train/dev/test splits.
//!
//! The canonical lexicon format is UTF-8 TSV, one word per line:
//! `surface<TAB>morph1|morph2|...`. The morpheme separator is configurable so
//! SIGMORPHON-style exports (`" @@"`) load without conversion.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::hash;
use crate::types::{SegmentedWord, WordFrequencyTable};

pub const DEFAULT_SEPARATOR: &str = "|";

/// A set of segmented words for one language. Surface forms are unique.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentationDataset {
    pub language: String,
    pub source: String,
    records: Vec<SegmentedWord>,
}

impl SegmentationDataset {
    /// Builds a dataset; a repeated surface form replaces the earlier record
    /// in place. Returns the dataset and the number of duplicates dropped.
    pub fn from_records(
        language: impl Into<String>,
        source: impl Into<String>,
        records: impl IntoIterator<Item = SegmentedWord>,
    ) -> (Self, usize) {
        let mut out: Vec<SegmentedWord> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        let mut duplicates = 0;
        for r in records {
            match index.get(r.surface()) {
                Some(&i) => {
                    out[i] = r;
                    duplicates += 1;
                }
                None => {
                    index.insert(r.surface().to_owned(), out.len());
                    out.push(r);
                }
            }
        }
        let ds = SegmentationDataset {
            language: language.into(),
            source: source.into(),
            records: out,
        };
        (ds, duplicates)
    }

    pub fn records(&self) -> &[SegmentedWord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Lookup table from surface form to record.
    pub fn index(&self) -> HashMap<&str, &SegmentedWord> {
        self.records.iter().map(|r| (r.surface(), r)).collect()
    }

    /// Mean number of morphemes per word.
    pub fn mean_morphemes(&self) -> f64 {
        if self.records.is_empty() {
            return 0.0;
        }
        let total: usize = self.records.iter().map(|r| r.morphemes().len()).sum();
        total as f64 / self.records.len() as f64
    }

    /// Canonical TSV with the given separator.
    pub fn to_tsv(&self, separator: &str) -> String {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(r.surface());
            out.push('\t');
            out.push_str(&r.morphemes().join(separator));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub line: usize,
    pub reason: String,
}

/// What happened while parsing a lexicon.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub accepted: usize,
    pub duplicates: usize,
    pub rejected: Vec<Rejection>,
}

impl LoadReport {
    /// Line-oriented rejection report.
    pub fn render(&self) -> String {
        let mut out = format!(
            "accepted {}\nduplicates {}\nrejected {}\n",
            self.accepted,
            self.duplicates,
            self.rejected.len()
        );
        for r in &self.rejected {
            out.push_str(&format!("line {}: {}\n", r.line, r.reason));
        }
        out
    }
}

/// Parses lexicon text. Lines whose morphemes do not concatenate to the
/// surface are skipped and listed in the report; more than half the
/// non-blank lines rejected is treated as a wrong separator and fails.
pub fn parse_segmentation(
    text: &str,
    separator: &str,
    language: &str,
    source: &str,
) -> Result<(SegmentationDataset, LoadReport)> {
    if separator.is_empty() {
        return Err(Error::Config("empty morpheme separator".into()));
    }
    let mut records = Vec::new();
    let mut rejected = Vec::new();
    let mut total = 0;
    for (i, line) in text.lines().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            continue;
        }
        total += 1;
        let parsed = match line.split_once('\t') {
            None => Err("no tab between surface and segmentation".to_owned()),
            Some((surface, seg)) => {
                let morphs: Vec<&str> = seg.split(separator).collect();
                SegmentedWord::new(surface, &morphs).map_err(|e| match e {
                    Error::Invariant(msg) => msg,
                    other => other.to_string(),
                })
            }
        };
        match parsed {
            Ok(w) => records.push(w),
            Err(reason) => rejected.push(Rejection { line: i + 1, reason }),
        }
    }
    if rejected.len() * 2 > total {
        let first = &rejected[0];
        return Err(Error::TooManyRejections {
            rejected: rejected.len(),
            total,
            first_line: first.line,
            first_reason: first.reason.clone(),
        });
    }
    let (ds, duplicates) = SegmentationDataset::from_records(language, source, records);
    let report = LoadReport {
        accepted: ds.len(),
        duplicates,
        rejected,
    };
    Ok((ds, report))
}

/// Reads a lexicon file. The language tag defaults to the file stem.
pub fn load_segmentation(
    path: impl AsRef<Path>,
    separator: &str,
) -> Result<(SegmentationDataset, LoadReport)> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = decode_utf8(&bytes)?;
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    parse_segmentation(text, separator, &stem, &path.display().to_string())
}

fn decode_utf8(bytes: &[u8]) -> Result<&str> {
    let bytes = bytes.strip_prefix(b"\xef\xbb\xbf").unwrap_or(bytes);
    std::str::from_utf8(bytes).map_err(|e| Error::InvalidUtf8 {
        offset: e.valid_up_to(),
    })
}

/// Counts whitespace-delimited words of a UTF-8 byte stream.
pub fn count_words(bytes: &[u8]) -> Result<WordFrequencyTable> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::InvalidUtf8 {
        offset: e.valid_up_to(),
    })?;
    let mut table = WordFrequencyTable::new();
    table.add_text(text);
    Ok(table)
}

pub fn count_words_file(path: impl AsRef<Path>) -> Result<WordFrequencyTable> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    count_words(&bytes)
}

/// Split proportions and the seed keying record assignment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub dev_fraction: f64,
    pub test_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    /// 80% train, 10% dev, 10% test.
    pub fn standard(seed: u64) -> Self {
        SplitSpec {
            train_fraction: 0.8,
            dev_fraction: 0.1,
            test_fraction: 0.1,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        let f = [self.train_fraction, self.dev_fraction, self.test_fraction];
        if f.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return Err(Error::Config(format!("split fractions out of range: {f:?}")));
        }
        if (f.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "split fractions sum to {}",
                f.iter().sum::<f64>()
            )));
        }
        Ok(())
    }

    /// Split sizes for `n` records by the largest-remainder rule; ties in
    /// remainder go to the earlier split.
    pub fn sizes(&self, n: usize) -> [usize; 3] {
        let f = [self.train_fraction, self.dev_fraction, self.test_fraction];
        let exact: Vec<f64> = f.iter().map(|x| x * n as f64).collect();
        // Floor with a tolerance so 0.8 * 10 lands on 8, not 7.999...
        let mut sizes: [usize; 3] = [0; 3];
        for i in 0..3 {
            sizes[i] = (exact[i] + 1e-9).floor() as usize;
        }
        let mut left = n - sizes.iter().sum::<usize>();
        let mut order: Vec<usize> = (0..3).collect();
        order.sort_by(|&a, &b| {
            let ra = exact[a] - sizes[a] as f64;
            let rb = exact[b] - sizes[b] as f64;
            rb.partial_cmp(&ra).unwrap().then(a.cmp(&b))
        });
        for &i in order.iter().cycle() {
            if left == 0 {
                break;
            }
            sizes[i] += 1;
            left -= 1;
        }
        sizes
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: SegmentationDataset,
    pub dev: SegmentationDataset,
    pub test: SegmentationDataset,
}

/// Partitions `ds` by ranking records on a seeded hash of their surface form.
///
/// Assignment depends only on surface forms and the seed, never on record
/// order. Each split keeps the dataset's original record order.
pub fn split_dataset(ds: &SegmentationDataset, spec: &SplitSpec) -> Result<Split> {
    spec.validate()?;
    if ds.len() < 10 {
        return Err(Error::Config(format!(
            "dataset has {} records; splitting needs at least 10",
            ds.len()
        )));
    }
    let sizes = spec.sizes(ds.len());
    let mut ranked: Vec<(u64, &str, usize)> = ds
        .records
        .iter()
        .enumerate()
        .map(|(i, r)| (hash::seeded(r.surface(), spec.seed), r.surface(), i))
        .collect();
    ranked.sort_unstable_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(b.1)));
    let mut bucket = vec![0u8; ds.len()];
    for (pos, &(_, _, i)) in ranked.iter().enumerate() {
        bucket[i] = if pos < sizes[0] {
            0
        } else if pos < sizes[0] + sizes[1] {
            1
        } else {
            2
        };
    }
    let part = |b: u8, name: &str| SegmentationDataset {
        language: ds.language.clone(),
        source: format!("{}#{name}", ds.source),
        records: ds
            .records
            .iter()
            .zip(&bucket)
            .filter(|(_, &x)| x == b)
            .map(|(r, _)| r.clone())
            .collect(),
    };
    Ok(Split {
        train: part(0, "train"),
        dev: part(1, "dev"),
        test: part(2, "test"),
    })
}

/// How automatically derived segmentations (analyzer output rather than
/// manual annotation) enter a split.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum AuxiliaryPolicy {
    /// Auxiliary records go to training only.
    #[default]
    TrainOnly,
    /// Auxiliary records are pooled with manual ones before splitting.
    Pooled,
}

/// Splits `manual` and adds `auxiliary` records per `policy`. Auxiliary
/// records whose surface already occurs in the manual data are dropped.
pub fn split_with_auxiliary(
    manual: &SegmentationDataset,
    auxiliary: &SegmentationDataset,
    spec: &SplitSpec,
    policy: AuxiliaryPolicy,
) -> Result<Split> {
    let known: std::collections::HashSet<&str> = manual.records.iter().map(|r| r.surface()).collect();
    let extra = auxiliary
        .records
        .iter()
        .filter(|r| !known.contains(r.surface()))
        .cloned();
    match policy {
        AuxiliaryPolicy::Pooled => {
            let (pooled, _) = SegmentationDataset::from_records(
                manual.language.clone(),
                manual.source.clone(),
                manual.records.iter().cloned().chain(extra),
            );
            split_dataset(&pooled, spec)
        }
        AuxiliaryPolicy::TrainOnly => {
            let mut split = split_dataset(manual, spec)?;
            split.train.records.extend(extra);
            Ok(split)
        }
    }
}
