//! Noise-robust synonym selection toolkit.
//!
//! Given a pair of synonyms and an utterance context, this crate decides which
//! member of the pair is more likely to survive a noisy listening environment.
//! It covers the whole signal path and analysis chain needed for that decision:
//!
//! - SNR-exact additive noise mixing of speech with a masker recording
//!   ([`audio`]),
//! - the Short-Time Objective Intelligibility (STOI) metric between clean and
//!   degraded signals ([`stoi`]),
//! - pronunciation lookup and phoneme-length features ([`lexicon`]),
//! - contextual predictability from an interpolated Kneser–Ney n-gram language
//!   model ([`ngram`]),
//! - Human Recognition Score (HRS) analysis of listening-experiment
//!   transcripts ([`analysis`]),
//! - ordinary least squares with AIC-based stepwise model selection
//!   ([`regression`]),
//! - and the per-condition selector combining all of the above ([`selector`]).
//!
//! The `lexinoise` binary exposes each stage as a subcommand; the crate's
//! `examples/` directory holds one runnable example per capability.

pub mod analysis;
pub mod audio;
pub mod error;
pub mod lexicon;
pub mod ngram;
pub mod regression;
pub mod report;
pub mod resample;
pub mod selector;
pub mod stats;
pub mod stoi;

pub use error::{Error, Result};
