//! Entity matching with staged LLM reasoning.
//!
//! `stepmatch` classifies candidate record pairs as match / no-match by
//! prompting a chat-completion model, and measures how prompt design and
//! multi-step reasoning strategies change accuracy and token cost. Everything
//! runs offline by default: deterministic mock backends stand in for the
//! network model so experiments, tests, and reports are reproducible.
//!
//! The pipeline, bottom to top:
//!
//! - [`records`]: schemas, entity records, candidate pairs, deterministic
//!   prompt serialization.
//! - [`datasets`]: two-table and pair-per-row benchmark layouts, split
//!   statistics, balanced few-shot exemplar sampling, and synthesized
//!   benchmark stand-ins.
//! - [`lexical`]: token diffs and common phrases between the two sides; used
//!   both for prompt hints and by the offline heuristic backend.
//! - [`prompts`]: the prompt design space (task frame, verbiage, response
//!   frame, shot count, hints) and renderers for every reasoning step.
//! - [`gateway`]: chat-completion backends (network, fixture, heuristic)
//!   behind one interface with retries, rate limiting, caching, and exact
//!   token accounting.
//! - [`strategies`]: the four matching strategies (single prompt, one-shot
//!   chain-of-thought, three-prompt chain, debate) producing transcripts.
//! - [`decoding`]: parsing completions into match decisions under forced or
//!   free response frames.
//! - [`metrics`]: confusion counts, precision/recall/F1, token totals, and
//!   report emission.
//! - [`config`] / [`runner`]: experiment configuration, runs, design-space
//!   sweeps, and report merging. The `stepmatch` binary is a thin wrapper
//!   over [`runner`].
//!
//! # Example
//!
//! ```
//! use stepmatch::datasets::benchmarks;
//! use stepmatch::gateway::{Gateway, HeuristicBackend};
//! use stepmatch::prompts::{PromptRenderer, PromptVariant, ResponseFrame, TemplateSet};
//! use stepmatch::strategies::{StrategyKind, StrategyRunner};
//! use stepmatch::decoding::Decoder;
//!
//! let bundle = benchmarks::find("AB").unwrap().synthesize();
//! let pair = &bundle.splits[&stepmatch::datasets::Split::Test][0];
//!
//! let renderer = PromptRenderer::new(
//!     TemplateSet::builtin(),
//!     bundle.schema.clone(),
//!     "product",
//!     Default::default(),
//! );
//! let gateway = Gateway::builder(Box::new(HeuristicBackend::new())).build();
//! let runner = StrategyRunner::new(renderer, gateway.into());
//!
//! let transcript = runner
//!     .run(StrategyKind::Baseline, pair, &PromptVariant::default(), &[])
//!     .unwrap();
//! let prediction = Decoder::default().decide(&transcript, ResponseFrame::Forced);
//! println!("{} -> {:?}", pair.pair_id, prediction.decision);
//! ```

pub mod config;
pub mod datasets;
pub mod decoding;
pub mod gateway;
pub mod lexical;
pub mod metrics;
pub mod prompts;
pub mod records;
pub mod runner;
pub mod strategies;

pub use records::{AttributeSchema, EntityRecord, GoldLabel, RecordPair, SerializationStyle};
