//! Experiment runner for the `cbwlc` library: JSON configs, seeded
//! replications fanned out over a thread pool, and deterministic CSV/JSON
//! result files.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiment;
pub mod output;

pub use config::{load_config, parse_config, ConfigError, ExperimentConfig};
pub use experiment::{prepare, Prepared, ResultsBundle};
pub use output::emit_results;
