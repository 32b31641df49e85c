use std::ffi::OsString;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use morphbpe::ingest::{
    count_words_file, load_segmentation, split_with_auxiliary, AuxiliaryPolicy, SplitSpec, DEFAULT_SEPARATOR,
};
use morphbpe::metrics::{
    corpus_mu_e, fertility, fertility_against, morph_consistency, ConsistencyConfig, ConsistencyReport,
    MuEOptions,
};
use morphbpe::trainer::train_with_progress;
use morphbpe::vocab_select::{parse_sizes, sweep, SweepConfig};
use morphbpe::{
    decode_words, encode_text, load_model, save_model, Error, Mode, SegmentationDataset, TrainConfig,
    WordFrequencyTable,
};
use serde::Serialize;

use crate::service;

/// Seed used when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 0;

#[derive(Parser, Debug)]
#[command(
    name = "morphbpe",
    version,
    about = "Train, apply and evaluate morphology-aware BPE tokenizers"
)]
struct Cli {
    /// Print machine-readable JSON on stdout
    #[arg(long, global = true)]
    json: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Learn a merge table from a corpus
    Train(TrainArgs),
    /// Tokenize text with a trained model
    Encode(EncodeArgs),
    /// Turn token ids back into text
    Decode(DecodeArgs),
    /// Intrinsic evaluation of a model
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Pick a vocabulary size by dev-set edit distance
    Sweep(SweepArgs),
    /// Write a deterministic 80/10/10 split of a lexicon
    Split(SplitArgs),
    /// Serve models over HTTP
    Serve(ServeArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum ModeArg {
    #[value(alias = "vanilla-bpe")]
    Bpe,
    #[value(alias = "morph-bpe")]
    Morphbpe,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Bpe => Mode::VanillaBpe,
            ModeArg::Morphbpe => Mode::MorphBpe,
        }
    }
}

#[derive(Args, Debug)]
struct CorpusArgs {
    /// Training corpus: raw UTF-8 text, or word<TAB>count lines with --counts
    #[arg(long)]
    corpus: PathBuf,
    /// Read the corpus as word<TAB>count lines
    #[arg(long)]
    counts: bool,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// Segmentation lexicon (surface<TAB>morphemes); required for morphbpe
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Morpheme separator used in the lexicon
    #[arg(long, default_value = DEFAULT_SEPARATOR)]
    separator: String,
    /// Target vocabulary size, counting <unk> and single characters
    #[arg(long)]
    vocab_size: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 2)]
    min_pair_freq: u64,
    /// Language tag stored in the model (defaults to the lexicon's)
    #[arg(long)]
    language: Option<String>,
    /// No progress lines on stderr
    #[arg(long)]
    quiet: bool,
}

#[derive(Args, Debug)]
struct EncodeArgs {
    #[arg(long)]
    model: PathBuf,
    /// Text to encode (stdin when neither --text nor --file is given)
    #[arg(long, conflicts_with = "file")]
    text: Option<String>,
    #[arg(long)]
    file: Option<PathBuf>,
    /// Print token ids
    #[arg(long, conflicts_with = "tokens")]
    ids: bool,
    /// Print token strings (the default)
    #[arg(long)]
    tokens: bool,
    /// Append character offsets to each token
    #[arg(long)]
    offsets: bool,
}

#[derive(Args, Debug)]
struct DecodeArgs {
    #[arg(long)]
    model: PathBuf,
    /// Comma-separated ids; `;` separates words
    #[arg(long)]
    ids: String,
}

#[derive(Subcommand, Debug)]
enum EvalCommand {
    /// Tokens per whitespace word over a raw text corpus
    Fertility(FertilityArgs),
    /// Mean edit distance between tokens and gold morphemes
    Edit(EditArgs),
    /// Clustered, resampled morphological consistency
    Consistency(ConsistencyArgs),
}

#[derive(Args, Debug)]
struct FertilityArgs {
    #[arg(long)]
    model: PathBuf,
    /// Raw UTF-8 text
    #[arg(long)]
    data: PathBuf,
    /// Count tokens relative to this model's tokens instead of words
    #[arg(long)]
    baseline: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct EditArgs {
    #[arg(long)]
    model: PathBuf,
    /// Segmentation lexicon
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = DEFAULT_SEPARATOR)]
    separator: String,
    /// Encode each gold morpheme separately
    #[arg(long)]
    use_gold_boundaries: bool,
    /// Include the per-word distances
    #[arg(long)]
    per_word: bool,
}

#[derive(Args, Debug)]
struct ConsistencyArgs {
    #[arg(long)]
    model: PathBuf,
    /// Segmentation lexicon
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value = DEFAULT_SEPARATOR)]
    separator: String,
    /// Number of clusters
    #[arg(long, default_value_t = 100)]
    k: usize,
    /// Word pairs sampled per cluster
    #[arg(long, default_value_t = 50)]
    pairs: usize,
    #[arg(long, default_value_t = 10)]
    resamples: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Ignore shared tokens shorter than this many characters
    #[arg(long, default_value_t = 1)]
    min_token_len: usize,
    /// Print a Markdown table
    #[arg(long)]
    markdown: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[command(flatten)]
    corpus: CorpusArgs,
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Dev lexicon the sizes are scored on
    #[arg(long)]
    dev: PathBuf,
    #[arg(long, value_enum)]
    mode: ModeArg,
    /// `start..end:step` or a comma-separated list
    #[arg(long, default_value = "8000..96000:8000")]
    sizes: String,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 2)]
    min_pair_freq: u64,
    #[arg(long)]
    use_gold_boundaries: bool,
    #[arg(long, default_value = DEFAULT_SEPARATOR)]
    separator: String,
}

#[derive(Args, Debug)]
struct SplitArgs {
    #[arg(long)]
    lexicon: PathBuf,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value = DEFAULT_SEPARATOR)]
    separator: String,
    /// Automatically derived segmentations, added to training only
    #[arg(long)]
    auxiliary: Option<PathBuf>,
    /// Pool auxiliary records with the manual ones before splitting
    #[arg(long, requires = "auxiliary")]
    pool_auxiliary: bool,
}

#[derive(Args, Debug)]
struct ServeArgs {
    /// Directory of model JSON files; each file stem becomes a model id
    #[arg(long)]
    models: PathBuf,
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
}

enum Failure {
    Usage(String),
    Data(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(msg) => Failure::Usage(msg),
            other => Failure::Data(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

/// Runs the command line `args` (program name first). Returns the exit
/// code: 0 on success, 1 for usage errors, 2 for data errors.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    1
                }
            };
        }
    };
    let json = cli.json;
    let result = match cli.command {
        Command::Train(a) => cmd_train(a, json, out, err),
        Command::Encode(a) => cmd_encode(a, json, out),
        Command::Decode(a) => cmd_decode(a, json, out),
        Command::Eval(EvalCommand::Fertility(a)) => cmd_fertility(a, json, out),
        Command::Eval(EvalCommand::Edit(a)) => cmd_edit(a, json, out, err),
        Command::Eval(EvalCommand::Consistency(a)) => cmd_consistency(a, json, out, err),
        Command::Sweep(a) => cmd_sweep(a, json, out, err),
        Command::Split(a) => cmd_split(a, json, out, err),
        Command::Serve(a) => cmd_serve(a, err),
    };
    match result {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
        Err(Failure::Data(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
    }
}

fn print_json<T: Serialize>(out: &mut dyn Write, value: &T) -> Outcome {
    let s = serde_json::to_string(value).map_err(|e| Failure::Data(e.to_string()))?;
    writeln!(out, "{s}")?;
    Ok(())
}

fn read_corpus(c: &CorpusArgs) -> Result<WordFrequencyTable, Failure> {
    if c.counts {
        let text = std::fs::read_to_string(&c.corpus).map_err(|e| io_err(&c.corpus, e))?;
        let text = text.strip_prefix('\u{feff}').unwrap_or(&text);
        Ok(WordFrequencyTable::from_tsv(text)?)
    } else {
        Ok(count_words_file(&c.corpus)?)
    }
}

fn read_lexicon(path: &Path, separator: &str, err: &mut dyn Write) -> Result<SegmentationDataset, Failure> {
    let (ds, report) = load_segmentation(path, separator)?;
    if !report.rejected.is_empty() {
        writeln!(
            err,
            "{}: {} lines rejected",
            path.display(),
            report.rejected.len()
        )?;
        for r in report.rejected.iter().take(10) {
            writeln!(err, "  line {}: {}", r.line, r.reason)?;
        }
    }
    if report.duplicates > 0 {
        writeln!(
            err,
            "{}: {} duplicate surface forms, last kept",
            path.display(),
            report.duplicates
        )?;
    }
    Ok(ds)
}

#[derive(Serialize)]
struct TrainSummary<'a> {
    out: String,
    mode: Mode,
    vocab_size: usize,
    merges: usize,
    reached_target: bool,
    language: Option<&'a str>,
}

fn cmd_train(a: TrainArgs, json: bool, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let words = read_corpus(&a.corpus)?;
    let lexicon = match &a.lexicon {
        Some(p) => Some(read_lexicon(p, &a.separator, err)?),
        None => None,
    };
    let cfg = TrainConfig::new(a.vocab_size, a.mode.into()).min_pair_frequency(a.min_pair_freq);
    let quiet = a.quiet;
    let outcome = train_with_progress(&words, lexicon.as_ref(), &cfg, |p| {
        if !quiet && (p.rank + 1) % 1000 == 0 {
            let _ = writeln!(
                err,
                "merge {}: {:?} + {:?} (frequency {}), vocab {}",
                p.rank + 1,
                p.left,
                p.right,
                p.frequency,
                p.vocab_size
            );
        }
    })?;
    let mut model = outcome.model;
    if let Some(lang) = a
        .language
        .clone()
        .or_else(|| lexicon.as_ref().map(|l| l.language.clone()))
    {
        model = model.with_language(lang);
    }
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    }
    save_model(&model, &a.out)?;
    if !outcome.reached_target && !quiet {
        writeln!(
            err,
            "note: stopped at vocabulary {} before the target {} (no pair left with frequency >= {})",
            model.vocab_size(),
            a.vocab_size,
            a.min_pair_freq
        )?;
    }
    let summary = TrainSummary {
        out: a.out.display().to_string(),
        mode: model.mode(),
        vocab_size: model.vocab_size(),
        merges: model.merges().len(),
        reached_target: outcome.reached_target,
        language: model.language(),
    };
    if json {
        print_json(out, &summary)
    } else {
        writeln!(
            out,
            "wrote {} ({}, vocabulary {}, {} merges)",
            summary.out, summary.mode, summary.vocab_size, summary.merges
        )?;
        Ok(())
    }
}

fn input_text(text: Option<String>, file: Option<PathBuf>) -> Result<String, Failure> {
    if let Some(t) = text {
        return Ok(t);
    }
    let bytes = match file {
        Some(p) => std::fs::read(&p).map_err(|e| io_err(&p, e))?,
        None => {
            let mut buf = Vec::new();
            std::io::stdin().read_to_end(&mut buf)?;
            buf
        }
    };
    let s = String::from_utf8(bytes).map_err(|e| Error::InvalidUtf8 {
        offset: e.utf8_error().valid_up_to(),
    })?;
    Ok(s.strip_prefix('\u{feff}').map(str::to_owned).unwrap_or(s))
}

fn cmd_encode(a: EncodeArgs, json: bool, out: &mut dyn Write) -> Outcome {
    let model = load_model(&a.model)?;
    let text = input_text(a.text, a.file)?;
    let words = encode_text(&model, &text);
    if json {
        return print_json(out, &words);
    }
    let mut items = Vec::new();
    for w in &words {
        for (i, tok) in w.tokens.iter().enumerate() {
            let mut item = if a.ids { w.ids[i].to_string() } else { tok.clone() };
            if a.offsets {
                let (s, e) = w.token_offsets[i];
                item.push_str(&format!("@{s}:{e}"));
            }
            items.push(item);
        }
    }
    writeln!(out, "{}", items.join(" "))?;
    Ok(())
}

fn parse_ids(spec: &str) -> Result<Vec<Vec<u32>>, Failure> {
    spec.split(';')
        .map(|word| {
            word.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| {
                    s.parse::<u32>()
                        .map_err(|_| Failure::Usage(format!("bad token id {s:?} in --ids")))
                })
                .collect()
        })
        .collect()
}

fn cmd_decode(a: DecodeArgs, json: bool, out: &mut dyn Write) -> Outcome {
    let model = load_model(&a.model)?;
    let text = decode_words(&model, parse_ids(&a.ids)?)?;
    if json {
        print_json(out, &serde_json::json!({ "text": text }))
    } else {
        writeln!(out, "{text}")?;
        Ok(())
    }
}

fn cmd_fertility(a: FertilityArgs, json: bool, out: &mut dyn Write) -> Outcome {
    let model = load_model(&a.model)?;
    let text = input_text(None, Some(a.data))?;
    let report = match &a.baseline {
        Some(p) => {
            let base = load_model(p)?;
            fertility_against(&model, &base, &stem(p), &text)?
        }
        None => fertility(&model, &text)?,
    };
    if json {
        print_json(out, &report)
    } else {
        writeln!(
            out,
            "phi {:.4} ({} tokens / {} {} units, {} words)",
            report.phi, report.token_count, report.baseline_count, report.baseline, report.word_count
        )?;
        Ok(())
    }
}

fn cmd_edit(a: EditArgs, json: bool, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let model = load_model(&a.model)?;
    let data = read_lexicon(&a.data, &a.separator, err)?;
    let opts = MuEOptions {
        use_gold_boundaries: a.use_gold_boundaries,
        keep_per_word: a.per_word,
    };
    let report = corpus_mu_e(&model, &data, opts)?;
    if json {
        return print_json(out, &report);
    }
    writeln!(
        out,
        "mean mu_e {:.4} over {} words",
        report.mean_mu_e, report.word_count
    )?;
    if let Some(per_word) = &report.per_word {
        for (r, d) in data.records().iter().zip(per_word) {
            writeln!(out, "{}\t{d}", r.surface())?;
        }
    }
    Ok(())
}

fn cmd_consistency(a: ConsistencyArgs, json: bool, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let model = load_model(&a.model)?;
    let data = read_lexicon(&a.data, &a.separator, err)?;
    let cfg = ConsistencyConfig {
        k: a.k,
        pairs_per_cluster: a.pairs,
        resamples: a.resamples,
        seed: a.seed,
        min_token_len: a.min_token_len,
        ..ConsistencyConfig::default()
    };
    let report: ConsistencyReport = morph_consistency(&model, &data, &cfg)?;
    if json {
        return print_json(out, &report);
    }
    if a.markdown {
        writeln!(out, "{}", ConsistencyReport::markdown_header())?;
        let label = format!("{} ({})", stem(&a.model), model.vocab_size());
        writeln!(out, "{}", report.markdown_row(&label))?;
    } else {
        writeln!(
            out,
            "precision {:.4} ± {:.4}  recall {:.4} ± {:.4}  F1 {:.4}",
            report.precision_mean, report.precision_std, report.recall_mean, report.recall_std, report.f1
        )?;
    }
    Ok(())
}

fn cmd_sweep(a: SweepArgs, json: bool, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let words = read_corpus(&a.corpus)?;
    let lexicon = match &a.lexicon {
        Some(p) => Some(read_lexicon(p, &a.separator, err)?),
        None => None,
    };
    let dev = read_lexicon(&a.dev, &a.separator, err)?;
    let mut cfg = SweepConfig::new(a.mode.into(), parse_sizes(&a.sizes)?);
    cfg.alpha = a.alpha;
    cfg.min_pair_frequency = a.min_pair_freq;
    cfg.use_gold_boundaries = a.use_gold_boundaries;
    let result = sweep(&words, lexicon.as_ref(), &dev, &cfg)?;
    if json {
        return print_json(out, &result);
    }
    write!(out, "{}", result.markdown())?;
    writeln!(out, "selected {}", result.selected_size)?;
    Ok(())
}

fn cmd_split(a: SplitArgs, json: bool, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let manual = read_lexicon(&a.lexicon, &a.separator, err)?;
    let aux = match &a.auxiliary {
        Some(p) => read_lexicon(p, &a.separator, err)?,
        None => SegmentationDataset::from_records(manual.language.clone(), "none", []).0,
    };
    let policy = if a.pool_auxiliary {
        AuxiliaryPolicy::Pooled
    } else {
        AuxiliaryPolicy::TrainOnly
    };
    let split = split_with_auxiliary(&manual, &aux, &SplitSpec::standard(a.seed), policy)?;
    std::fs::create_dir_all(&a.out_dir).map_err(|e| io_err(&a.out_dir, e))?;
    for (name, part) in [
        ("train", &split.train),
        ("dev", &split.dev),
        ("test", &split.test),
    ] {
        let path = a.out_dir.join(format!("{name}.tsv"));
        std::fs::write(&path, part.to_tsv(DEFAULT_SEPARATOR)).map_err(|e| io_err(&path, e))?;
    }
    let sizes = serde_json::json!({
        "train": split.train.len(),
        "dev": split.dev.len(),
        "test": split.test.len(),
        "out_dir": a.out_dir.display().to_string(),
    });
    if json {
        print_json(out, &sizes)
    } else {
        writeln!(
            out,
            "train {}\ndev {}\ntest {}",
            split.train.len(),
            split.dev.len(),
            split.test.len()
        )?;
        Ok(())
    }
}

fn cmd_serve(a: ServeArgs, err: &mut dyn Write) -> Outcome {
    let models = service::load_models(&a.models)?;
    if models.is_empty() {
        return Err(Failure::Data(format!("no model files in {}", a.models.display())));
    }
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind((a.host.as_str(), a.port)).await?;
        let ids: Vec<&String> = models.keys().collect();
        writeln!(
            err,
            "serving {} models {ids:?} on http://{}",
            models.len(),
            listener.local_addr()?
        )?;
        axum::serve(listener, service::router(models)).await
    })?;
    Ok(())
}

fn stem(p: &Path) -> String {
    p.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_owned(),
        source,
    }
}
