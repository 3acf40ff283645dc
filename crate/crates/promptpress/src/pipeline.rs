//! The full compression pipeline.
//!
//! Stages, in order: resolve the token budget; rank documents against the question and keep
//! the best prefix under the coarse budget (a multiple of the target, so the fine stage has
//! slack to choose from); compress instruction and question at their fixed ratios; spread
//! the remaining budget over documents with a rank-linear schedule, rescaled so the ceil'd
//! segment quotas land on the budget; contrastively prune each document; assemble.
//!
//! A target at or above the original size short-circuits to the identity — the output is the
//! original sections rendered unchanged.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::{base_budget, dynamic_tau, fit_doc_taus};
use crate::coarse::{rank_documents, retain_within, ScoredDocument};
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::fine::{compress_contrastive, compress_plain, SegmentPlan};
use crate::prompt::{CompressedPrompt, StructuredPrompt};
use crate::scorer::Scorer;
use crate::token::TokenSequence;

/// Per-document outcome. Documents dropped at the coarse stage keep their importance but
/// have no rank and zero retention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DocumentReport {
    pub doc_index: usize,
    pub importance: Option<f64>,
    pub rank: Option<usize>,
    pub original_tokens: usize,
    pub retained_tokens: usize,
    pub tau: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionReport {
    pub original_tokens: usize,
    pub compressed_tokens: usize,
    pub target_tokens: usize,
    /// original / compressed, with compressed floored at one token to stay finite.
    pub ratio: f64,
    pub per_doc: Vec<DocumentReport>,
    pub elapsed_ms: u64,
    /// `(original - compressed) / 1000 × input_per_1k`, when prices are configured.
    pub estimated_savings: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct CompressionOutcome {
    pub compressed: CompressedPrompt,
    pub report: CompressionReport,
}

fn full_retention(seq: &TokenSequence) -> (&TokenSequence, Vec<usize>) {
    (seq, (0..seq.len()).collect())
}

fn finish(
    prompt: &StructuredPrompt,
    compressed: CompressedPrompt,
    target: usize,
    per_doc: Vec<DocumentReport>,
    config: &PipelineConfig,
    t0: Instant,
) -> CompressionOutcome {
    let original_tokens = prompt.original_tokens();
    let compressed_tokens = compressed.token_count();
    let report = CompressionReport {
        original_tokens,
        compressed_tokens,
        target_tokens: target,
        ratio: original_tokens as f64 / compressed_tokens.max(1) as f64,
        per_doc,
        elapsed_ms: t0.elapsed().as_millis() as u64,
        estimated_savings: config
            .prices
            .map(|p| (original_tokens.saturating_sub(compressed_tokens)) as f64 / 1000.0 * p.input_per_1k),
    };
    CompressionOutcome { compressed, report }
}

/// Compress a prompt to the configured budget.
pub fn compress(
    prompt: &StructuredPrompt,
    config: &PipelineConfig,
    scorer: &dyn Scorer,
) -> Result<CompressionOutcome> {
    let t0 = Instant::now();
    config.validate()?;
    if prompt.question.is_empty() {
        return Err(Error::InvalidQuery("compression requires a non-empty question".into()));
    }
    let original_tokens = prompt.original_tokens();
    let target = config.target_for(original_tokens)?;

    if target >= original_tokens {
        // nothing to trim: identity output, documents in original order
        let mut parts = vec![full_retention(&prompt.instruction)];
        parts.extend(prompt.documents.iter().map(full_retention));
        parts.push(full_retention(&prompt.question));
        let compressed = CompressedPrompt::assemble(&parts)?;
        let per_doc = prompt
            .documents
            .iter()
            .enumerate()
            .map(|(doc_index, d)| DocumentReport {
                doc_index,
                importance: None,
                rank: None,
                original_tokens: d.len(),
                retained_tokens: d.len(),
                tau: 1.0,
            })
            .collect();
        return Ok(finish(prompt, compressed, target, per_doc, config, t0));
    }

    let plan = SegmentPlan::new(config.segment_size);

    // coarse: rank everything, keep the best prefix under granular_k × target doc tokens
    let ranked = rank_documents(prompt, scorer)?;
    let coarse_budget = (config.granular_k * target as f64).ceil() as usize;
    let retained = retain_within(&ranked, coarse_budget);

    // instruction and question compress at their fixed ratios
    let ins_keep = compress_plain(&prompt.instruction, config.tau_ins, scorer, &plan)?;
    let que_keep = compress_plain(&prompt.question, config.tau_que, scorer, &plan)?;

    // document base ratio from the budget formula (also the infeasibility gate) ...
    let doc_total: usize = retained.iter().map(|d| d.token_count).sum();
    let tau_doc = base_budget(
        target,
        prompt.instruction.len(),
        prompt.question.len(),
        config.tau_ins,
        config.tau_que,
        doc_total,
    )?;

    // ... but the spendable document budget comes from what ins/que actually kept
    let reserved = ins_keep.len() + que_keep.len();
    if reserved >= target {
        return Err(Error::InfeasibleBudget { reserved, target });
    }
    let doc_budget = target - reserved;

    let taus: Vec<f64> = retained
        .iter()
        .map(|d| dynamic_tau(d.rank_index, retained.len(), tau_doc, config.delta_tau))
        .collect();
    let lens: Vec<usize> = retained.iter().map(|d| d.token_count).collect();
    let fitted = fit_doc_taus(&taus, &lens, &plan, doc_budget);

    let keeps: Vec<Vec<usize>> = retained
        .par_iter()
        .zip(fitted.par_iter())
        .map(|(d, &tau)| {
            compress_contrastive(
                &prompt.documents[d.doc_index],
                &prompt.question,
                tau,
                scorer,
                &plan,
                config.question_position,
            )
        })
        .collect::<Result<_>>()?;

    // emission order: rank order when reordering, original order otherwise
    let mut emission: Vec<usize> = (0..retained.len()).collect();
    if !config.reorder {
        emission.sort_by_key(|&ri| retained[ri].doc_index);
    }

    let mut parts: Vec<(&TokenSequence, Vec<usize>)> =
        vec![(&prompt.instruction, ins_keep.clone())];
    for &ri in &emission {
        parts.push((&prompt.documents[retained[ri].doc_index], keeps[ri].clone()));
    }
    parts.push((&prompt.question, que_keep.clone()));
    let compressed = CompressedPrompt::assemble(&parts)?;
    debug_assert!(compressed.token_count() <= target);

    let mut per_doc: Vec<DocumentReport> = prompt
        .documents
        .iter()
        .enumerate()
        .map(|(doc_index, d)| DocumentReport {
            doc_index,
            importance: None,
            rank: None,
            original_tokens: d.len(),
            retained_tokens: 0,
            tau: 0.0,
        })
        .collect();
    for d in &ranked {
        per_doc[d.doc_index].importance = Some(d.importance);
    }
    for (ri, d) in retained.iter().enumerate() {
        per_doc[d.doc_index].rank = Some(d.rank_index);
        per_doc[d.doc_index].tau = fitted[ri];
        per_doc[d.doc_index].retained_tokens = keeps[ri].len();
    }

    Ok(finish(prompt, compressed, target, per_doc, config, t0))
}

/// Ranked view of the documents without compressing anything — the `rank` surface.
pub fn rank(prompt: &StructuredPrompt, scorer: &dyn Scorer) -> Result<Vec<ScoredDocument>> {
    rank_documents(prompt, scorer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scorer::NgramScorer;
    use crate::token::{SchemeRegistry, WhitespaceScheme};

    fn prompt() -> StructuredPrompt {
        let registry = SchemeRegistry::default();
        StructuredPrompt::from_texts(
            &registry,
            "whitespace",
            "Write a concise answer based only on the provided documents.",
            &[
                "The city of Lyon is known for its gastronomy and silk weaving history.",
                "Paris is the capital of France and hosts the national government bodies.",
                "Marseille is a major port city on the Mediterranean coast of France.",
                "The Loire valley is famous for its châteaux and produces renowned wines.",
            ],
            "What is the capital of France?",
            crate::prompt::DEFAULT_RESTRICT,
        )
        .unwrap()
    }

    fn scorer_for(p: &StructuredPrompt) -> NgramScorer {
        NgramScorer::from_corpus(&p.corpus_text(), &WhitespaceScheme)
    }

    #[test]
    fn oversized_target_is_identity() {
        let p = prompt();
        let scorer = scorer_for(&p);
        let cfg = PipelineConfig::with_target(10_000);
        let out = compress(&p, &cfg, &scorer).unwrap();
        assert_eq!(out.report.compressed_tokens, out.report.original_tokens);
        assert_eq!(out.report.ratio, 1.0);
        let expected: Vec<&str> = std::iter::once(p.instruction.text())
            .chain(p.documents.iter().map(|d| d.text()))
            .chain(std::iter::once(p.question.text()))
            .collect();
        assert_eq!(out.compressed.render(), expected.join("\n"));
        assert!(out.report.per_doc.iter().all(|d| d.importance.is_none() && d.tau == 1.0));
    }

    #[test]
    fn budget_is_respected_and_approached() {
        let p = prompt();
        let scorer = scorer_for(&p);
        let original = p.original_tokens();
        for target in [original / 2, original / 3, 2 * original / 3] {
            let cfg = PipelineConfig::with_target(target);
            let out = compress(&p, &cfg, &scorer).unwrap();
            assert!(
                out.report.compressed_tokens <= target,
                "target {target}: got {}",
                out.report.compressed_tokens
            );
            // the fit should get close from below — ceil granularity costs at most a
            // couple of tokens per section at this scale
            assert!(
                out.report.compressed_tokens + 8 >= target,
                "target {target}: got only {}",
                out.report.compressed_tokens
            );
        }
    }

    #[test]
    fn ratio_config_resolves_against_the_prompt() {
        let p = prompt();
        let scorer = scorer_for(&p);
        let out = compress(&p, &PipelineConfig::with_ratio(2.0), &scorer).unwrap();
        let original = p.original_tokens();
        assert_eq!(out.report.target_tokens, original.div_ceil(2));
        assert!(out.report.compressed_tokens <= out.report.target_tokens);
    }

    #[test]
    fn deterministic_across_runs() {
        let p = prompt();
        let scorer = scorer_for(&p);
        let cfg = PipelineConfig::with_target(40);
        let a = compress(&p, &cfg, &scorer).unwrap();
        let b = compress(&p, &cfg, &scorer).unwrap();
        assert_eq!(a.compressed.render(), b.compressed.render());
        assert_eq!(a.compressed.origin_map(), b.compressed.origin_map());
        let mut ra = a.report.clone();
        let mut rb = b.report.clone();
        ra.elapsed_ms = 0;
        rb.elapsed_ms = 0;
        assert_eq!(ra, rb);
    }

    #[test]
    fn relevant_document_leads_when_reordering() {
        let p = prompt();
        let scorer = scorer_for(&p);
        let cfg = PipelineConfig { reorder: true, ..PipelineConfig::with_target(40) };
        let out = compress(&p, &cfg, &scorer).unwrap();
        // doc 1 holds the answer phrasing; it must rank first and lead the emission
        let first_doc = out
            .compressed
            .origin_map()
            .iter()
            .find_map(|o| match &o.section {
                crate::token::SectionId::Document(k) => Some(*k),
                _ => None,
            })
            .unwrap();
        assert_eq!(first_doc, 1);
        assert_eq!(out.report.per_doc[1].rank, Some(0));
    }

    #[test]
    fn original_order_is_preserved_when_not_reordering() {
        let p = prompt();
        let scorer = scorer_for(&p);
        let cfg = PipelineConfig { reorder: false, ..PipelineConfig::with_target(60) };
        let out = compress(&p, &cfg, &scorer).unwrap();
        let doc_order: Vec<u32> = out
            .compressed
            .origin_map()
            .iter()
            .filter_map(|o| match &o.section {
                crate::token::SectionId::Document(k) => Some(*k),
                _ => None,
            })
            .collect();
        let mut dedup = doc_order.clone();
        dedup.dedup();
        let mut sorted = dedup.clone();
        sorted.sort_unstable();
        assert_eq!(dedup, sorted, "document emission order {dedup:?} not ascending");
    }

    #[test]
    fn origin_map_is_valid_provenance() {
        let p = prompt();
        let scorer = scorer_for(&p);
        let out = compress(&p, &PipelineConfig::with_target(45), &scorer).unwrap();
        // every origin points at a real token, strictly increasing within each section
        let rebuilt = CompressedPrompt::from_origin_map(
            &p,
            out.compressed.render().to_string(),
            out.compressed.origin_map().to_vec(),
        )
        .unwrap();
        assert_eq!(rebuilt.token_count(), out.compressed.token_count());
    }

    #[test]
    fn tight_coarse_budget_drops_documents() {
        let p = prompt();
        let scorer = scorer_for(&p);
        let cfg = PipelineConfig { granular_k: 1.0, ..PipelineConfig::with_target(25) };
        let out = compress(&p, &cfg, &scorer).unwrap();
        assert!(out.report.per_doc.iter().any(|d| d.rank.is_none()));
        // dropped documents still carry their importance for inspection
        assert!(out.report.per_doc.iter().all(|d| d.importance.is_some()));
    }

    #[test]
    fn empty_question_is_rejected() {
        let registry = SchemeRegistry::default();
        let p = StructuredPrompt::from_texts(
            &registry,
            "whitespace",
            "instruction",
            &["some document"],
            "",
            "",
        )
        .unwrap();
        let scorer = scorer_for(&p);
        let err = compress(&p, &PipelineConfig::with_target(5), &scorer).unwrap_err();
        assert!(matches!(err, Error::InvalidQuery(_)));
    }

    #[test]
    fn infeasible_reservation_is_an_error() {
        let registry = SchemeRegistry::default();
        let long_ins = vec!["word"; 120].join(" ");
        let p = StructuredPrompt::from_texts(
            &registry,
            "whitespace",
            &long_ins,
            &["alpha beta gamma delta"],
            "what is alpha?",
            "",
        )
        .unwrap();
        let scorer = scorer_for(&p);
        let err = compress(&p, &PipelineConfig::with_target(40), &scorer).unwrap_err();
        assert!(matches!(err, Error::InfeasibleBudget { .. }));
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn savings_follow_the_configured_price() {
        let p = prompt();
        let scorer = scorer_for(&p);
        let cfg = PipelineConfig {
            prices: Some(crate::config::Prices { input_per_1k: 2.0 }),
            ..PipelineConfig::with_target(40)
        };
        let out = compress(&p, &cfg, &scorer).unwrap();
        let expected = (out.report.original_tokens - out.report.compressed_tokens) as f64
            / 1000.0
            * 2.0;
        assert_eq!(out.report.estimated_savings, Some(expected));
    }
}
