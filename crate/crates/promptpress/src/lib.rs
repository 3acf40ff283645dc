//! Question-aware prompt compression for long multi-document contexts.
//!
//! Long retrieval-augmented prompts carry far more text than a model needs to answer one
//! question. This crate shrinks them to a token budget in two question-aware passes:
//!
//! 1. **Coarse**: every document is scored by how much more likely it makes the question
//!    (mean log-likelihood of the question plus a restrictive statement, conditioned on the
//!    document), then the best prefix is kept and optionally moved to the front.
//! 2. **Fine**: within the survivors, each token is scored contrastively — how much does
//!    conditioning on the question change this token's surprisal — and each segment keeps
//!    its quota of top tokens. Budgets skew toward higher-ranked documents and are rescaled
//!    so the ceil'd per-segment quotas land on the overall target.
//!
//! Compressed output keeps full provenance (every emitted token knows its origin), which
//! powers [`recovery`]: spans of a model response that echo compressed text are mapped back
//! to the original bytes, so entities mangled by token pruning come back whole.
//!
//! Scoring runs through the [`scorer::Scorer`] trait: a self-contained n-gram backend (no
//! model weights, fully deterministic, adapts itself to the scored context) and an HTTP
//! client for remote log-probability endpoints, plus a reference server for that wire
//! contract.
//!
//! ```
//! use promptpress::{compress, NgramScorer, PipelineConfig, SchemeRegistry, StructuredPrompt};
//! use promptpress::prompt::DEFAULT_RESTRICT;
//! use promptpress::token::WhitespaceScheme;
//!
//! let registry = SchemeRegistry::default();
//! let prompt = StructuredPrompt::from_texts(
//!     &registry,
//!     "whitespace",
//!     "Answer using the documents.",
//!     &[
//!         "The Eiffel Tower stands in Paris and was finished in 1889.",
//!         "Berlin is known for its museums and long history.",
//!     ],
//!     "When was the Eiffel Tower finished?",
//!     DEFAULT_RESTRICT,
//! )
//! .unwrap();
//! let scorer = NgramScorer::from_corpus(&prompt.corpus_text(), &WhitespaceScheme);
//! let out = compress(&prompt, &PipelineConfig::with_ratio(2.0), &scorer).unwrap();
//! assert!(out.report.compressed_tokens <= out.report.target_tokens);
//! ```

pub mod budget;
pub mod coarse;
pub mod config;
pub mod error;
pub mod fine;
pub mod harness;
pub mod pipeline;
pub mod prompt;
pub mod recovery;
pub mod scorer;
pub mod token;

pub use coarse::ScoredDocument;
pub use config::{PipelineConfig, Prices, ScorerConfig};
pub use error::{Error, Result};
pub use fine::QuestionPosition;
pub use pipeline::{compress, CompressionOutcome, CompressionReport, DocumentReport};
pub use prompt::{CompressedPrompt, OriginRef, StructuredPrompt};
pub use recovery::{Recovered, RecoveryIndex};
pub use scorer::{HttpScorer, HttpScorerConfig, LogProbQuery, NgramScorer, Scorer};
pub use token::{SchemeRegistry, SectionId, TokenSequence};
