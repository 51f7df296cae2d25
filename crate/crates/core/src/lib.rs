//! Toolkit for evaluating how chat LLMs treat lexical borrowing in Luxembourgish.
//!
//! The pipeline has five stages, each a module:
//!
//! - [`bench`] filters a token-labeled corpus and draws a balanced,
//!   stratified benchmark.
//! - [`lkg`] ingests a pattern index, a loanword lexicon and a synonym table
//!   into a typed linguistic knowledge graph; [`retrieval`] builds
//!   token-specific explanation subgraphs from it.
//! - [`prompt`] renders the two-role prompt for every
//!   (instance, strategy, task) triple.
//! - [`gateway`] talks to chat-completion endpoints (or an offline mock) and
//!   [`runner`] drives the model × strategy × task grid with crash-safe resume.
//! - [`parse`] normalizes free-text answers and [`scoring`] computes every
//!   metric and aggregate series.
//!
//! The runnable programs under `examples/` walk through each stage.

pub mod bench;
pub mod cli;
pub mod config;
pub mod error;
pub mod gateway;
pub mod label;
pub mod lexicon;
pub mod lkg;
pub mod parse;
pub mod prompt;
pub mod retrieval;
pub mod runner;
pub mod scoring;
pub mod synth;
pub mod text;

pub use error::{Error, Result};
pub use label::{Answer, Era, GoldLabel, NeologyLabel, Task};
