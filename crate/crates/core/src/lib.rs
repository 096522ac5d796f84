//! Propaganda technique classification with emotion features.
//!
//! The crate covers the full pipeline over span-annotated news articles:
//!
//! - [`corpus`]: articles, span annotations, cleaning, tokenization and segment extraction
//! - [`emotion`], [`score_client`]: five-dimensional emotion intensity scores from a
//!   lexicon, a precomputed file or an HTTP scoring service
//! - [`category`]: dictionary category proportions
//! - [`embeddings`]: precomputed sentence embeddings or a feature-hashing fallback
//! - [`features`]: feature bundles, the feature cache and ablation conditions
//! - [`net`]: the fusion classifier, its logistic baseline, training and checkpoints
//! - [`stats`]: Kendall tau-b correlation tables with significance
//! - [`eval`]: per-technique and micro-averaged F1 reports
//! - [`cli`]: the `proplab` command line
//!
//! [`synthetic`] builds deterministic fixture corpora used by the examples and tests.

pub mod category;
pub mod cli;
pub mod corpus;
pub mod embeddings;
pub mod emotion;
pub mod error;
pub mod eval;
pub mod features;
pub mod net;
pub mod pipeline;
pub mod score_client;
pub mod stats;
pub mod synthetic;

pub use error::{Error, Result};
