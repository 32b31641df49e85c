//! The `morphbpe` command line tool and its HTTP service.

mod commands;
pub mod service;

pub use commands::{run, DEFAULT_SEED};
