//! Evaluation and batch-processing support: synthetic workloads, a BM25 retrieval baseline,
//! metric helpers, the JSONL runner behind the CLI, and a completions client for
//! end-to-end benchmarks.

pub mod bm25;
pub mod llm;
pub mod metrics;
pub mod runner;
pub mod synthetic;

pub use bm25::Bm25Index;
pub use llm::CompletionClient;
pub use runner::{BenchRow, CompressOutput, InputRecord, RankOutput, RecoverOutput, RecoverRecord};
pub use synthetic::{generate, generate_with_total, SynthConfig, SyntheticCase};
