//! Pair-wise recommender-system evaluation with an LLM judge.
//!
//! The pipeline: ingest a dataset into a [`corpus::Corpus`], produce
//! per-user recommendation lists for the systems under test, build a
//! five-part judging prompt per user ([`promptkit`]), send it to a
//! chat-completions provider or the deterministic mock judge
//! ([`judge`]), parse win/tie/lose verdicts ([`verdict`]), and
//! aggregate them into quantile-Q scores, rankings, and reports that
//! cross-check against offline metrics ([`metrics`], [`arena`]).
//!
//! Start with the `examples/` directory: each file is a runnable
//! walkthrough of one capability, from corpus ingestion to a full
//! mock-judged arena. The same pipeline is scriptable through the thin
//! `recarena` binary (see [`cli`]).

pub mod arena;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod judge;
pub mod metrics;
pub mod promptkit;
pub mod verdict;

pub use error::{Error, Result};
