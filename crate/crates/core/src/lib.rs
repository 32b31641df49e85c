//! Morphology-aware byte pair encoding.
//!
//! The crate trains BPE merge tables over whitespace-pretokenized words, either
//! unconstrained ([`Mode::VanillaBpe`]) or with merges confined to the gold
//! morphemes of each word ([`Mode::MorphBpe`]). Both modes produce the same
//! [`TokenizerModel`] and share a standard lowest-rank-first encoder, so a
//! morph-trained model drops into any ordinary BPE inference path.
//!
//! Intrinsic evaluation lives in [`metrics`]: fertility, the morphological edit
//! distance between a word's tokens and its morphemes, and a clustered,
//! bootstrapped morphological-consistency F1. [`vocab_select`] sweeps vocabulary
//! sizes and picks the smallest one past which the edit distance stops improving
//! significantly under a paired t-test.

pub mod encoder;
mod error;
mod hash;
pub mod ingest;
pub mod inspect;
pub mod metrics;
mod model;
pub mod stats;
pub mod trainer;
mod types;
pub mod vocab_select;

pub use encoder::{decode, decode_words, encode_segmented, encode_text, encode_word, EncodedWord};
pub use error::{Error, Result};
pub use ingest::{SegmentationDataset, SplitSpec};
pub use model::{load_model, save_model, MergeEvent, Mode, Normalization, TokenizerModel, UNK_ID, UNK_TOKEN};
pub use trainer::{train, TrainConfig, TrainOutcome};
pub use types::{normalize, SegmentedWord, WordFrequencyTable};
