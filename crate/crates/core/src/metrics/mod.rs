//! Intrinsic tokenizer evaluation: fertility, morphological edit distance
//! and morphological consistency F1.

mod consistency;
mod edit;
mod fertility;
pub mod kmeans;

pub use consistency::{cluster_words, f1, morph_consistency, ConsistencyConfig, ConsistencyReport};
pub use edit::{align, corpus_mu_e, morph_edit_distance, EditDistanceReport, EditOp, MuEOptions};
pub use fertility::{fertility, fertility_against, FertilityReport};
