//! BM25 retrieval baseline (k1 = 1.2, b = 0.75) for comparing against question-aware
//! document ranking. Scores use the standard Robertson idf, floored-free since the
//! `ln(1 + …)` form is already positive.

use std::collections::HashMap;

pub const K1: f64 = 1.2;
pub const B: f64 = 0.75;

pub struct Bm25Index {
    term_freqs: Vec<HashMap<String, usize>>,
    doc_lens: Vec<usize>,
    doc_freq: HashMap<String, usize>,
    avg_len: f64,
}

impl Bm25Index {
    pub fn new<S: AsRef<str>>(docs: &[S]) -> Self {
        let tokenized: Vec<Vec<&str>> =
            docs.iter().map(|d| d.as_ref().split_whitespace().collect()).collect();
        let doc_lens: Vec<usize> = tokenized.iter().map(Vec::len).collect();
        let avg_len = if docs.is_empty() {
            0.0
        } else {
            doc_lens.iter().sum::<usize>() as f64 / docs.len() as f64
        };

        let mut doc_freq: HashMap<String, usize> = HashMap::new();
        let term_freqs: Vec<HashMap<String, usize>> = tokenized
            .iter()
            .map(|words| {
                let mut tf: HashMap<String, usize> = HashMap::new();
                for w in words {
                    *tf.entry((*w).to_string()).or_insert(0) += 1;
                }
                for term in tf.keys() {
                    *doc_freq.entry(term.clone()).or_insert(0) += 1;
                }
                tf
            })
            .collect();

        Bm25Index { term_freqs, doc_lens, doc_freq, avg_len }
    }

    fn idf(&self, term: &str) -> f64 {
        let n = self.term_freqs.len() as f64;
        let df = self.doc_freq.get(term).copied().unwrap_or(0) as f64;
        (1.0 + (n - df + 0.5) / (df + 0.5)).ln()
    }

    pub fn score(&self, query: &str, doc: usize) -> f64 {
        let mut seen: Vec<&str> = Vec::new();
        let mut total = 0.0;
        for term in query.split_whitespace() {
            if seen.contains(&term) {
                continue;
            }
            seen.push(term);
            let tf = self.term_freqs[doc].get(term).copied().unwrap_or(0) as f64;
            if tf == 0.0 {
                continue;
            }
            let norm = K1 * (1.0 - B + B * self.doc_lens[doc] as f64 / self.avg_len);
            total += self.idf(term) * tf * (K1 + 1.0) / (tf + norm);
        }
        total
    }

    /// All documents sorted by score descending, document index breaking ties — so equal
    /// scores rank the earliest document first, exactly like an argmax over the scores.
    pub fn rank(&self, query: &str) -> Vec<(usize, f64)> {
        let mut scored: Vec<(usize, f64)> =
            (0..self.term_freqs.len()).map(|i| (i, self.score(query, i))).collect();
        scored.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
        scored
    }

    pub fn top1(&self, query: &str) -> Option<usize> {
        self.rank(query).first().map(|&(i, _)| i)
    }
}
