//! Builtin scoring backend: interpolated add-one-smoothed bigram/unigram language model.
//!
//! Counts come from a training corpus fixed at construction, and — crucially — from the
//! query itself: every context (and already-consumed continuation) token is folded into the
//! working counts left to right, purely per call. Conditioning on a document therefore means
//! scoring under that document's evidence, which is what makes document-conditional question
//! likelihood discriminative and the contrastive score non-degenerate. Probabilities over the
//! fixed vocabulary still sum to exactly 1 for any context, and the logprob of a token depends
//! only on the tokens before it, so prefix consistency is exact.

use std::collections::HashMap;

use crate::error::Result;
use crate::scorer::{LogProbQuery, LogProbResult, Scorer};
use crate::token::Scheme;

/// Reserved vocabulary entry that out-of-vocabulary query tokens map onto.
pub const UNK: &str = "<unk>";

const W_BIGRAM: f64 = 0.7;
const W_UNIGRAM: f64 = 0.3;

pub struct NgramScorer {
    model_id: String,
    vocab: Vec<String>,
    index: HashMap<String, u32>,
    unigram: Vec<u64>,
    total: u64,
    bigram: HashMap<(u32, u32), u64>,
    /// Number of bigrams starting at each token (the bigram denominator; differs from the
    /// unigram count at sequence ends).
    bigram_ctx: Vec<u64>,
}

impl NgramScorer {
    /// Train on an iterator of corpus tokens. The vocabulary is `<unk>` plus every distinct
    /// corpus token in first-seen order.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut vocab = vec![UNK.to_string()];
        let mut index = HashMap::from([(UNK.to_string(), 0u32)]);
        let mut unigram = vec![0u64];
        let mut bigram = HashMap::new();
        let mut bigram_ctx = vec![0u64];
        let mut total = 0u64;
        let mut prev: Option<u32> = None;

        for tok in tokens {
            let tok = tok.as_ref();
            let id = *index.entry(tok.to_string()).or_insert_with(|| {
                vocab.push(tok.to_string());
                unigram.push(0);
                bigram_ctx.push(0);
                (vocab.len() - 1) as u32
            });
            unigram[id as usize] += 1;
            total += 1;
            if let Some(p) = prev {
                *bigram.entry((p, id)).or_insert(0) += 1;
                bigram_ctx[p as usize] += 1;
            }
            prev = Some(id);
        }

        NgramScorer { model_id: "builtin-ngram".into(), vocab, index, unigram, total, bigram, bigram_ctx }
    }

    /// Train on raw text through a tokenization scheme.
    pub fn from_corpus(text: &str, scheme: &dyn Scheme) -> Self {
        let spans = scheme.spans(text);
        Self::from_tokens(spans.iter().map(|&(s, e)| &text[s as usize..e as usize]))
    }

    pub fn with_model_id(mut self, id: impl Into<String>) -> Self {
        self.model_id = id.into();
        self
    }

    /// The finite vocabulary (including `<unk>` at index 0), for brute-force enumeration.
    pub fn vocabulary(&self) -> &[String] {
        &self.vocab
    }

    fn id_of(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(0)
    }
}

/// Per-call working counts: base tables plus whatever the query has consumed so far.
struct Adapted<'a> {
    base: &'a NgramScorer,
    d_uni: HashMap<u32, u64>,
    d_big: HashMap<(u32, u32), u64>,
    d_ctx: HashMap<u32, u64>,
    extra_total: u64,
    prev: Option<u32>,
}

impl<'a> Adapted<'a> {
    fn new(base: &'a NgramScorer) -> Self {
        Adapted { base, d_uni: HashMap::new(), d_big: HashMap::new(), d_ctx: HashMap::new(), extra_total: 0, prev: None }
    }

    fn consume(&mut self, id: u32) {
        if let Some(p) = self.prev {
            *self.d_big.entry((p, id)).or_insert(0) += 1;
            *self.d_ctx.entry(p).or_insert(0) += 1;
        }
        *self.d_uni.entry(id).or_insert(0) += 1;
        self.extra_total += 1;
        self.prev = Some(id);
    }

    /// Probability of `id` as the next token. With no previous token this is the smoothed
    /// unigram; otherwise the fixed 0.7/0.3 bigram/unigram interpolation. Both components
    /// are individually normalized over the vocabulary, so the mixture is too.
    fn prob(&self, id: u32) -> f64 {
        let v = self.base.vocab.len() as f64;
        let uni_count = self.base.unigram[id as usize] + self.d_uni.get(&id).copied().unwrap_or(0);
        let uni = (uni_count as f64 + 1.0) / ((self.base.total + self.extra_total) as f64 + v);
        match self.prev {
            None => uni,
            Some(p) => {
                let big_count = self.base.bigram.get(&(p, id)).copied().unwrap_or(0)
                    + self.d_big.get(&(p, id)).copied().unwrap_or(0);
                let ctx_count = self.base.bigram_ctx[p as usize] + self.d_ctx.get(&p).copied().unwrap_or(0);
                let big = (big_count as f64 + 1.0) / (ctx_count as f64 + v);
                W_BIGRAM * big + W_UNIGRAM * uni
            }
        }
    }
}

impl Scorer for NgramScorer {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn score(&self, query: &LogProbQuery) -> Result<LogProbResult> {
        if query.continuation.is_empty() {
            return Err(crate::error::Error::InvalidQuery("continuation must be non-empty".into()));
        }
        let mut adapted = Adapted::new(self);
        for tok in &query.context {
            adapted.consume(self.id_of(tok));
        }
        let mut logprobs = Vec::with_capacity(query.continuation.len());
        for tok in &query.continuation {
            let id = self.id_of(tok);
            logprobs.push(adapted.prob(id).ln());
            adapted.consume(id);
        }
        LogProbResult::checked(logprobs, query.continuation.len(), self.model_id.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab_scorer() -> NgramScorer {
        // corpus "a b a b": vocab = [<unk>, a, b] (V = 3), unigram a=2 b=2 (total 4),
        // bigrams (a,b)=2 (b,a)=1, bigram contexts a=2 b=1
        NgramScorer::from_tokens(["a", "b", "a", "b"])
    }

    fn q(ctx: &[&str], cont: &[&str]) -> LogProbQuery {
        LogProbQuery::new(
            ctx.iter().map(|s| s.to_string()).collect(),
            cont.iter().map(|s| s.to_string()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn unigram_start_matches_hand_count() {
        // First token with empty context is pure add-one unigram: (2+1)/(4+3) = 3/7.
        let r = ab_scorer().score(&q(&[], &["a"])).unwrap();
        assert!((r.logprobs[0] - (-0.8472978603872036)).abs() < 1e-12);
    }

    #[test]
    fn interpolation_and_query_counts_match_hand_arithmetic() {
        let s = ab_scorer();

        // ctx=[], cont=[a, b]: scoring `b` after consuming `a` —
        // bigram (2+1)/(2+3) = 0.6, unigram (2+1)/(5+3) = 0.375 → 0.7·0.6 + 0.3·0.375 = 0.5325
        let r = s.score(&q(&[], &["a", "b"])).unwrap();
        assert!((r.logprobs[1].exp() - 0.5325).abs() < 1e-12);

        // ctx=[b], cont=[a]: bigram (1+1)/(1+3) = 0.5, unigram (2+1)/(5+3) = 0.375 → 0.4625
        let r = s.score(&q(&["b"], &["a"])).unwrap();
        assert!((r.logprobs[0].exp() - 0.4625).abs() < 1e-12);

        // ctx=[b, b], cont=[a]: the context itself contributes a (b,b) bigram —
        // bigram (1+1)/(2+3) = 0.4, unigram (2+1)/(6+3) = 1/3 → 0.28 + 0.1 = 0.38
        let r = s.score(&q(&["b", "b"], &["a"])).unwrap();
        assert!((r.logprobs[0].exp() - 0.38).abs() < 1e-12);
    }

    #[test]
    fn oov_tokens_share_the_unk_slot() {
        let s = ab_scorer();
        let r1 = s.score(&q(&[], &["zebra"])).unwrap();
        let r2 = s.score(&q(&[], &["quokka"])).unwrap();
        assert_eq!(r1.logprobs, r2.logprobs);
    }

    #[test]
    fn deterministic_across_calls() {
        let s = ab_scorer();
        let query = q(&["a", "zebra"], &["b", "a", "b"]);
        assert_eq!(s.score(&query).unwrap(), s.score(&query).unwrap());
    }

    #[test]
    fn prefix_consistency_is_exact() {
        let s = NgramScorer::from_tokens("the cat sat on the mat the cat".split_whitespace());
        let long = s.score(&q(&["the", "mat"], &["the", "cat", "sat", "on"])).unwrap();
        let short = s.score(&q(&["the", "mat"], &["the", "cat"])).unwrap();
        assert_eq!(&long.logprobs[..2], &short.logprobs[..]);
    }

    #[test]
    fn vocabulary_probabilities_sum_to_one() {
        let s = NgramScorer::from_tokens("one fish two fish red fish blue fish".split_whitespace());
        for ctx in [&[][..], &["fish"][..], &["blue", "fish"][..], &["unseen", "words"][..]] {
            let sum: f64 = s
                .vocabulary()
                .to_vec()
                .iter()
                .map(|v| s.score(&q(ctx, &[v])).unwrap().logprobs[0].exp())
                .sum();
            assert!((sum - 1.0).abs() < 1e-9, "ctx {ctx:?}: sum {sum}");
        }
    }

    #[test]
    fn empty_corpus_is_exactly_uniform() {
        // Vocabulary is {<unk>} alone, so every probability is exactly 1 regardless of
        // context — the degenerate uniform scorer the tie-break fixtures rely on.
        let s = NgramScorer::from_tokens(std::iter::empty::<&str>());
        let r = s.score(&q(&["anything", "goes"], &["x", "y", "x"])).unwrap();
        assert_eq!(r.logprobs, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn empty_continuation_rejected() {
        assert!(LogProbQuery::new(vec![], vec![]).is_err());
    }

    #[test]
    fn batch_matches_elementwise_in_order() {
        let s = ab_scorer();
        let queries = [q(&[], &["a"]), q(&["a"], &["b"]), q(&["b"], &["a", "a"])];
        let batch = s.score_batch(&queries);
        for (query, got) in queries.iter().zip(&batch) {
            assert_eq!(got.as_ref().unwrap(), &s.score(query).unwrap());
        }
    }
}
