//! Coarse, question-aware document selection.
//!
//! Each document is scored by the mean per-token log-likelihood of the question (plus the
//! restrictive statement) conditioned on that document. Higher is more relevant: scoring is
//! per-token-normalized so long documents are not penalized, and documents are retained
//! greedily in rank order under a token budget, then optionally reordered most-relevant-first
//! to counter lost-in-the-middle position effects.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prompt::StructuredPrompt;
use crate::scorer::{LogProbQuery, Scorer};
use crate::token::TokenSequence;

/// A document's rank metadata after coarse selection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredDocument {
    /// Index in the original prompt's document list.
    pub doc_index: usize,
    /// Mean log-likelihood of question+restrict conditioned on this document.
    pub importance: f64,
    pub token_count: usize,
    /// 0 = most relevant among retained documents.
    pub rank_index: usize,
}

/// Mean log-likelihood of `question ++ restrict` given `doc` as context.
///
/// The restrictive statement strengthens the question's demand that the answer be present;
/// pass an empty sequence to score the bare question.
pub fn importance(
    doc: &TokenSequence,
    question: &TokenSequence,
    restrict: &TokenSequence,
    scorer: &dyn Scorer,
) -> Result<f64> {
    if question.is_empty() {
        return Err(Error::InvalidQuery("importance requires a non-empty question".into()));
    }
    let mut continuation = question.to_vec();
    continuation.extend(restrict.tokens().map(str::to_string));
    let n = continuation.len() as f64;
    let result = scorer.score(&LogProbQuery::new(doc.to_vec(), continuation)?)?;
    Ok(result.sum() / n)
}

/// Score every document against the question and return all of them in rank order,
/// `rank_index` assigned 0..n. Scoring is embarrassingly parallel.
pub fn rank_documents(
    prompt: &StructuredPrompt,
    scorer: &dyn Scorer,
) -> Result<Vec<ScoredDocument>> {
    let scores: Vec<f64> = prompt
        .documents
        .par_iter()
        .map(|doc| importance(doc, &prompt.question, &prompt.restrict, scorer))
        .collect::<Result<_>>()?;

    let ranked: Vec<ScoredDocument> = scores
        .into_iter()
        .enumerate()
        .map(|(doc_index, importance)| ScoredDocument {
            doc_index,
            importance,
            token_count: prompt.documents[doc_index].len(),
            rank_index: 0,
        })
        .collect();
    let mut ranked = reorder(&ranked);
    for (rank, doc) in ranked.iter_mut().enumerate() {
        doc.rank_index = rank;
    }
    Ok(ranked)
}

/// Greedy prefix of a ranked list: keep documents in rank order while the cumulative token
/// count stays within `coarse_budget_tokens`. The top document is always retained when any
/// exist, even if it alone exceeds the budget. Ranks are reassigned 0..n over the survivors.
pub fn retain_within(ranked: &[ScoredDocument], coarse_budget_tokens: usize) -> Vec<ScoredDocument> {
    let mut retained: Vec<ScoredDocument> = Vec::new();
    let mut cumulative = 0usize;
    for doc in ranked {
        if !retained.is_empty() && cumulative + doc.token_count > coarse_budget_tokens {
            break;
        }
        cumulative += doc.token_count;
        retained.push(doc.clone());
    }
    for (rank, doc) in retained.iter_mut().enumerate() {
        doc.rank_index = rank;
    }
    retained
}

/// Rank, then keep the budgeted prefix.
pub fn coarse_compress(
    prompt: &StructuredPrompt,
    coarse_budget_tokens: usize,
    scorer: &dyn Scorer,
) -> Result<Vec<ScoredDocument>> {
    Ok(retain_within(&rank_documents(prompt, scorer)?, coarse_budget_tokens))
}

/// Sort descending by importance, original index breaking ties. Total order, so the result
/// is invariant under permutations of the input and idempotent.
pub fn reorder(docs: &[ScoredDocument]) -> Vec<ScoredDocument> {
    let mut out = docs.to_vec();
    out.sort_by(|a, b| {
        b.importance.total_cmp(&a.importance).then(a.doc_index.cmp(&b.doc_index))
    });
    out
}
