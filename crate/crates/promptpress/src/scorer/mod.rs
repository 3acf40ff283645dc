//! Log-probability scoring backends.
//!
//! Everything downstream (document ranking, contrastive token pruning) consumes one
//! interface: token-level log-probabilities of a continuation given a context. Two backends
//! ship here — a deterministic, closed-form n-gram model every test can recompute by hand,
//! and an HTTP client for remote models — plus a reference server for the wire contract.

mod http;
mod ngram;
mod serve;

pub use http::{HttpProfile, HttpScorer, HttpScorerConfig, API_KEY_ENV};
pub use ngram::NgramScorer;
pub use serve::{spawn_server, ServerHandle};

use crate::error::{Error, Result};
use crate::token::TokenSequence;

/// One scoring request: logprob of each continuation token given everything before it
/// (context plus the already-consumed continuation prefix).
#[derive(Debug, Clone, PartialEq)]
pub struct LogProbQuery {
    pub context: Vec<String>,
    pub continuation: Vec<String>,
}

impl LogProbQuery {
    pub fn new(context: Vec<String>, continuation: Vec<String>) -> Result<Self> {
        if continuation.is_empty() {
            return Err(Error::InvalidQuery("continuation must be non-empty".into()));
        }
        Ok(LogProbQuery { context, continuation })
    }

    pub fn from_sequences(context: &TokenSequence, continuation: &TokenSequence) -> Result<Self> {
        Self::new(context.to_vec(), continuation.to_vec())
    }
}

/// Per-token natural-log probabilities, one per continuation token, each finite and ≤ 0.
#[derive(Debug, Clone, PartialEq)]
pub struct LogProbResult {
    pub logprobs: Vec<f64>,
    pub model_id: String,
}

impl LogProbResult {
    /// Validate backend output against the result invariants. Values a hair above zero
    /// (float noise from a remote backend) are clamped to exactly 0.
    pub fn checked(mut logprobs: Vec<f64>, expected_len: usize, model_id: String) -> Result<Self> {
        if logprobs.len() != expected_len {
            return Err(Error::ScorerProtocol(format!(
                "expected {expected_len} logprobs, got {}",
                logprobs.len()
            )));
        }
        for lp in &mut logprobs {
            if !lp.is_finite() {
                return Err(Error::ScorerProtocol(format!("non-finite logprob {lp}")));
            }
            if *lp > 0.0 {
                if *lp > 1e-9 {
                    return Err(Error::ScorerProtocol(format!("positive logprob {lp}")));
                }
                *lp = 0.0;
            }
        }
        Ok(LogProbResult { logprobs, model_id })
    }

    pub fn sum(&self) -> f64 {
        self.logprobs.iter().sum()
    }
}

/// A scoring backend. Implementations are thread-safe; `score_batch` may run queries
/// concurrently but returns results in request order, reporting failures per query.
pub trait Scorer: Send + Sync {
    fn model_id(&self) -> &str;

    fn score(&self, query: &LogProbQuery) -> Result<LogProbResult>;

    fn score_batch(&self, queries: &[LogProbQuery]) -> Vec<Result<LogProbResult>> {
        queries.iter().map(|q| self.score(q)).collect()
    }
}

impl<T: Scorer + ?Sized> Scorer for std::sync::Arc<T> {
    fn model_id(&self) -> &str {
        (**self).model_id()
    }
    fn score(&self, query: &LogProbQuery) -> Result<LogProbResult> {
        (**self).score(query)
    }
    fn score_batch(&self, queries: &[LogProbQuery]) -> Vec<Result<LogProbResult>> {
        (**self).score_batch(queries)
    }
}
