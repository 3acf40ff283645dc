//! JSONL batch processing behind the command-line surface.
//!
//! Every command reads one JSON record per line, writes one JSON result per line to the
//! machine channel (stdout) and a human-readable summary to the log channel (stderr).
//! Records are processed in parallel but always emitted in input order; the first failing
//! record aborts the run with its error, so exit codes stay meaningful.

use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::coarse::ScoredDocument;
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::harness::llm::CompletionClient;
use crate::harness::metrics;
use crate::harness::synthetic::{generate, SynthConfig};
use crate::pipeline::{compress, CompressionReport};
use crate::prompt::{CompressedPrompt, OriginRef, StructuredPrompt};
use crate::recovery::{RecoveredSegment, RecoveryIndex};
use crate::token::SchemeRegistry;

/// One compression/ranking task.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct InputRecord {
    #[serde(default)]
    pub instruction: String,
    pub documents: Vec<String>,
    pub question: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub answers: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_doc_index: Option<usize>,
}

impl InputRecord {
    pub fn to_prompt(
        &self,
        registry: &SchemeRegistry,
        config: &PipelineConfig,
    ) -> Result<StructuredPrompt> {
        StructuredPrompt::from_texts(
            registry,
            &config.budget_scheme,
            &self.instruction,
            &self.documents,
            &self.question,
            &config.restrict_text,
        )
    }
}

/// One recovery task: the original prompt, the provenance of its compressed form, and the
/// model response to rewrite.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RecoverRecord {
    #[serde(default)]
    pub instruction: String,
    pub documents: Vec<String>,
    pub question: String,
    pub origin_map: Vec<OriginRef>,
    pub response: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CompressOutput {
    pub compressed: String,
    pub report: CompressionReport,
    pub origin_map: Vec<OriginRef>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RankOutput {
    pub ranking: Vec<ScoredDocument>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gold_doc_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hit_at_1: Option<bool>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RecoverOutput {
    pub recovered: String,
    pub segments: Vec<RecoveredSegment>,
}

/// Benchmark row. Deliberately free of wall-clock fields so repeated runs are
/// byte-identical.
#[derive(Debug, Serialize, Deserialize)]
pub struct BenchRow {
    pub original_tokens: usize,
    pub compressed_tokens: usize,
    pub ratio: f64,
    pub target_tokens: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimated_savings: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub answered: Option<bool>,
}

/// Parse a JSONL stream, reporting the 1-based line number of the first broken record.
pub fn parse_lines<T: DeserializeOwned>(reader: impl BufRead) -> Result<Vec<T>> {
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::Jsonl { line: i + 1, message: e.to_string() })?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line)
            .map_err(|e| Error::Jsonl { line: i + 1, message: e.to_string() })?;
        records.push(record);
    }
    Ok(records)
}

fn emit(out: &mut impl Write, value: &impl Serialize) -> Result<()> {
    let line = serde_json::to_string(value).expect("output records always serialize");
    writeln!(out, "{line}").map_err(|e| Error::io("output stream", e))
}

fn compress_record(
    record: &InputRecord,
    registry: &SchemeRegistry,
    config: &PipelineConfig,
) -> Result<CompressOutput> {
    let prompt = record.to_prompt(registry, config)?;
    let scorer = config.scorer.build(registry, &config.scorer_scheme, &prompt.corpus_text())?;
    let outcome = compress(&prompt, config, scorer.as_ref())?;
    Ok(CompressOutput {
        compressed: outcome.compressed.render().to_string(),
        origin_map: outcome.compressed.origin_map().to_vec(),
        report: outcome.report,
    })
}

pub fn run_compress(
    reader: impl BufRead,
    out: &mut impl Write,
    log: &mut impl Write,
    config: &PipelineConfig,
) -> Result<()> {
    let records: Vec<InputRecord> = parse_lines(reader)?;
    let registry = SchemeRegistry::default();
    let results: Vec<Result<CompressOutput>> =
        records.par_iter().map(|r| compress_record(r, &registry, config)).collect();

    writeln!(log, "{:>6}  {:>9}  {:>10}  {:>6}  {:>6}", "record", "original", "compressed", "ratio", "target")
        .map_err(|e| Error::io("log stream", e))?;
    let (mut total_in, mut total_out) = (0usize, 0usize);
    for (i, result) in results.into_iter().enumerate() {
        let output = result?;
        total_in += output.report.original_tokens;
        total_out += output.report.compressed_tokens;
        writeln!(
            log,
            "{:>6}  {:>9}  {:>10}  {:>6.2}  {:>6}",
            i,
            output.report.original_tokens,
            output.report.compressed_tokens,
            output.report.ratio,
            output.report.target_tokens
        )
        .map_err(|e| Error::io("log stream", e))?;
        emit(out, &output)?;
    }
    writeln!(
        log,
        "total: {total_in} -> {total_out} tokens ({:.2}x)",
        total_in as f64 / total_out.max(1) as f64
    )
    .map_err(|e| Error::io("log stream", e))?;
    Ok(())
}

pub fn run_rank(
    reader: impl BufRead,
    out: &mut impl Write,
    log: &mut impl Write,
    config: &PipelineConfig,
) -> Result<()> {
    let records: Vec<InputRecord> = parse_lines(reader)?;
    let registry = SchemeRegistry::default();
    let results: Vec<Result<RankOutput>> = records
        .par_iter()
        .map(|record| {
            let prompt = record.to_prompt(&registry, config)?;
            let scorer =
                config.scorer.build(&registry, &config.scorer_scheme, &prompt.corpus_text())?;
            let ranking = crate::coarse::rank_documents(&prompt, scorer.as_ref())?;
            let hit_at_1 = record
                .gold_doc_index
                .map(|gold| ranking.first().is_some_and(|top| top.doc_index == gold));
            Ok(RankOutput { ranking, gold_doc_index: record.gold_doc_index, hit_at_1 })
        })
        .collect();

    let mut hits = Vec::new();
    for (i, result) in results.into_iter().enumerate() {
        let output = result?;
        if let Some(top) = output.ranking.first() {
            writeln!(
                log,
                "record {i}: top doc {} (importance {:.4}){}",
                top.doc_index,
                top.importance,
                match output.hit_at_1 {
                    Some(true) => " hit",
                    Some(false) => " miss",
                    None => "",
                }
            )
            .map_err(|e| Error::io("log stream", e))?;
        }
        if let Some(hit) = output.hit_at_1 {
            hits.push(if hit { 1.0 } else { 0.0 });
        }
        emit(out, &output)?;
    }
    if !hits.is_empty() {
        writeln!(log, "recall@1: {:.3} over {} labelled records", metrics::mean(&hits), hits.len())
            .map_err(|e| Error::io("log stream", e))?;
    }
    Ok(())
}

pub fn run_recover(
    reader: impl BufRead,
    out: &mut impl Write,
    log: &mut impl Write,
    config: &PipelineConfig,
) -> Result<()> {
    let records: Vec<RecoverRecord> = parse_lines(reader)?;
    let registry = SchemeRegistry::default();
    let scheme = registry.get(&config.budget_scheme)?;
    for (i, record) in records.into_iter().enumerate() {
        let prompt = StructuredPrompt::from_texts(
            &registry,
            &config.budget_scheme,
            &record.instruction,
            &record.documents,
            &record.question,
            &config.restrict_text,
        )?;
        let compressed =
            CompressedPrompt::from_origin_map(&prompt, String::new(), record.origin_map)?;
        let index = RecoveryIndex::build(&prompt, &compressed, config.min_match_tokens)?;
        let recovered = index.recover_text(&record.response, scheme.as_ref())?;
        let expanded = recovered.segments.iter().filter(|s| s.origin.is_some()).count();
        writeln!(log, "record {i}: {} segment(s) expanded", expanded)
            .map_err(|e| Error::io("log stream", e))?;
        emit(out, &RecoverOutput { recovered: recovered.text, segments: recovered.segments })?;
    }
    Ok(())
}

/// Deterministic synthetic workload: `n` cases derived from consecutive seeds.
pub fn synthetic_records(n: usize, seed: u64, distractor_terms: bool) -> Vec<InputRecord> {
    (0..n)
        .map(|i| {
            let case = generate(&SynthConfig {
                seed: seed.wrapping_add(i as u64),
                distractor_terms,
                ..Default::default()
            });
            InputRecord {
                instruction: case.instruction,
                documents: case.documents,
                question: case.question,
                answers: Some(case.answers),
                gold_doc_index: Some(case.gold_doc_index),
            }
        })
        .collect()
}

pub fn run_bench(
    records: Vec<InputRecord>,
    out: &mut impl Write,
    log: &mut impl Write,
    config: &PipelineConfig,
    llm: Option<&CompletionClient>,
) -> Result<()> {
    let registry = SchemeRegistry::default();
    let results: Vec<Result<BenchRow>> = records
        .par_iter()
        .map(|record| {
            let output = compress_record(record, &registry, config)?;
            let answered = match (llm, &record.answers) {
                (Some(client), Some(answers)) if !answers.is_empty() => {
                    let response = client.complete(&output.compressed, 64)?;
                    Some(metrics::contains_answer(&response, answers))
                }
                _ => None,
            };
            Ok(BenchRow {
                original_tokens: output.report.original_tokens,
                compressed_tokens: output.report.compressed_tokens,
                ratio: output.report.ratio,
                target_tokens: output.report.target_tokens,
                estimated_savings: output.report.estimated_savings,
                answered,
            })
        })
        .collect();

    let mut ratios = Vec::new();
    let mut answered = Vec::new();
    for result in results {
        let row = result?;
        ratios.push(row.ratio);
        if let Some(a) = row.answered {
            answered.push(if a { 1.0 } else { 0.0 });
        }
        emit(out, &row)?;
    }
    writeln!(log, "bench: {} record(s), mean ratio {:.2}x", ratios.len(), metrics::mean(&ratios))
        .map_err(|e| Error::io("log stream", e))?;
    if !answered.is_empty() {
        writeln!(log, "answered: {:.3} over {} record(s)", metrics::mean(&answered), answered.len())
            .map_err(|e| Error::io("log stream", e))?;
    }
    Ok(())
}
