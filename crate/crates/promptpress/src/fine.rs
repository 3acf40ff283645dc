//! Fine-grained token pruning.
//!
//! Sections are split into fixed-size segments. Each segment is scored in two scorer calls —
//! once with the running compressed prefix as context, once with the question prepended — and
//! the contrastive score (base NLL minus question-conditioned NLL) decides which tokens
//! survive. A token the question makes easier to predict scores positive. Segments are
//! sequentially dependent: the prefix a segment sees is what earlier segments retained.
//! Instruction and question sections use the plain variant that keeps high-surprisal tokens.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scorer::{LogProbQuery, Scorer};
use crate::token::TokenSequence;

/// Contrastive score for one token. `score = base_nll - cond_nll`; positive means the
/// question raised this token's probability.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenScore {
    /// Token index within its section.
    pub index: usize,
    pub score: f64,
    pub base_nll: f64,
    pub cond_nll: f64,
}

/// Segmentation policy: consecutive ranges of at most `segment_size` tokens.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentPlan {
    pub segment_size: usize,
}

impl SegmentPlan {
    pub fn new(segment_size: usize) -> Self {
        SegmentPlan { segment_size: segment_size.max(1) }
    }

    pub fn split(&self, len: usize) -> Vec<Range<usize>> {
        (0..len).step_by(self.segment_size).map(|s| s..(s + self.segment_size).min(len)).collect()
    }

    /// Tokens to retain from a segment of `len` under ratio `tau`: ceil(tau·len), computed
    /// with a small epsilon so float noise cannot round an exact product upward, and at
    /// least 1 whenever tau > 0 and the segment is non-empty.
    pub fn quota(tau: f64, len: usize) -> usize {
        if len == 0 || tau <= 0.0 {
            return 0;
        }
        let x = tau.min(1.0) * len as f64;
        let q = (x - 1e-9).ceil().max(1.0) as usize;
        q.min(len)
    }
}

/// Where the question sits relative to the context when computing the conditioned pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuestionPosition {
    #[default]
    Before,
    After,
}

/// Score one segment of `section` against the question, given the compressed prefix
/// accumulated so far. Two batched scorer calls: context alone, question + context.
pub fn contrastive_scores(
    section: &TokenSequence,
    segment: Range<usize>,
    question: &TokenSequence,
    compressed_prefix: &[String],
    scorer: &dyn Scorer,
    position: QuestionPosition,
) -> Result<Vec<TokenScore>> {
    let continuation: Vec<String> =
        segment.clone().map(|i| section.token(i).to_string()).collect();
    if continuation.is_empty() {
        return Ok(Vec::new());
    }

    let base_ctx = compressed_prefix.to_vec();
    let mut cond_ctx = Vec::with_capacity(question.len() + compressed_prefix.len());
    match position {
        QuestionPosition::Before => {
            cond_ctx.extend(question.tokens().map(str::to_string));
            cond_ctx.extend_from_slice(compressed_prefix);
        }
        QuestionPosition::After => {
            cond_ctx.extend_from_slice(compressed_prefix);
            cond_ctx.extend(question.tokens().map(str::to_string));
        }
    }

    let queries = [
        LogProbQuery::new(base_ctx, continuation.clone())?,
        LogProbQuery::new(cond_ctx, continuation)?,
    ];
    let mut results = scorer.score_batch(&queries).into_iter();
    let base = results.next().unwrap()?;
    let cond = results.next().unwrap()?;

    Ok(segment
        .enumerate()
        .map(|(j, index)| {
            let base_nll = -base.logprobs[j];
            let cond_nll = -cond.logprobs[j];
            TokenScore { index, score: base_nll - cond_nll, base_nll, cond_nll }
        })
        .collect())
}

/// Generic segment-wise selection. `score_fn` is called once per segment with the segment
/// range and the compressed prefix retained so far, returning one selection score per token.
/// Each segment keeps its ceil(tau·len) highest-scoring tokens, earlier index winning ties,
/// and the survivors extend the prefix seen by later segments. Returns retained indices in
/// ascending order.
pub fn compress_section<F>(
    section: &TokenSequence,
    tau: f64,
    plan: &SegmentPlan,
    mut score_fn: F,
) -> Result<Vec<usize>>
where
    F: FnMut(Range<usize>, &[String]) -> Result<Vec<f64>>,
{
    let mut retained = Vec::new();
    let mut prefix: Vec<String> = Vec::new();

    for segment in plan.split(section.len()) {
        let quota = SegmentPlan::quota(tau, segment.len());
        if quota == 0 {
            continue;
        }
        let scores = score_fn(segment.clone(), &prefix)?;
        debug_assert_eq!(scores.len(), segment.len());

        let mut order: Vec<usize> = (0..segment.len()).collect();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        let mut picked: Vec<usize> = order[..quota].iter().map(|&j| segment.start + j).collect();
        picked.sort_unstable();

        for &i in &picked {
            prefix.push(section.token(i).to_string());
        }
        retained.extend(picked);
    }
    Ok(retained)
}

/// Question-aware compression of one section: selection score = contrastive score.
pub fn compress_contrastive(
    section: &TokenSequence,
    question: &TokenSequence,
    tau: f64,
    scorer: &dyn Scorer,
    plan: &SegmentPlan,
    position: QuestionPosition,
) -> Result<Vec<usize>> {
    compress_section(section, tau, plan, |segment, prefix| {
        Ok(contrastive_scores(section, segment, question, prefix, scorer, position)?
            .into_iter()
            .map(|t| t.score)
            .collect())
    })
}

/// Question-agnostic compression: keep high-surprisal tokens (highest base NLL).
pub fn compress_plain(
    section: &TokenSequence,
    tau: f64,
    scorer: &dyn Scorer,
    plan: &SegmentPlan,
) -> Result<Vec<usize>> {
    compress_section(section, tau, plan, |segment, prefix| {
        let continuation: Vec<String> =
            segment.map(|i| section.token(i).to_string()).collect();
        let result = scorer.score(&LogProbQuery::new(prefix.to_vec(), continuation)?)?;
        Ok(result.logprobs.iter().map(|lp| -lp).collect())
    })
}
