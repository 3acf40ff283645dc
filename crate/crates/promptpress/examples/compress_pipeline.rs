//! End-to-end compression: structured prompt in, compressed prompt + report out.
//!
//! The default configuration needs nothing but a budget — the built-in scorer fits
//! itself to the prompt's own text. Documents are ranked against the question, budgeted
//! by rank, pruned token-by-token, and reassembled in rank order.
//!
//! ```sh
//! cargo run --example compress_pipeline
//! ```

use promptpress::{compress, PipelineConfig, SchemeRegistry, StructuredPrompt};

fn main() -> promptpress::Result<()> {
    let registry = SchemeRegistry::default();
    let docs = [
        "The lighthouse keeper logged every passing vessel in a leather ledger kept beside the lamp room stairs.",
        "Herring gulls nested on the rocks below the lighthouse, unbothered by the horn that sounded through the fog.",
        "The lamp itself burned whale oil until 1902, when the keeper installed an incandescent mantle that tripled its range.",
        "Supply boats landed twice a month in summer, weather permitting, and hardly at all once the winter swells arrived.",
    ];
    let prompt = StructuredPrompt::from_texts(
        &registry,
        "whitespace",
        "Answer using only the passages provided.",
        &docs,
        "what fuel did the lamp burn before 1902",
        promptpress::prompt::DEFAULT_RESTRICT,
    )?;

    let config = PipelineConfig::with_ratio(2.5);
    let scorer = config.scorer.build(&registry, &config.scorer_scheme, &prompt.corpus_text())?;
    let outcome = compress(&prompt, &config, &scorer)?;

    println!("original:   {} tokens", outcome.report.original_tokens);
    println!("target:     {} tokens", outcome.report.target_tokens);
    println!("compressed: {} tokens (x{:.2})", outcome.report.compressed_tokens, outcome.report.ratio);

    println!("\nper-document fate:");
    for d in &outcome.report.per_doc {
        match d.rank {
            Some(rank) => println!(
                "  doc {} rank {} keep-rate {:.2}: {} -> {} tokens",
                d.doc_index, rank, d.tau, d.original_tokens, d.retained_tokens
            ),
            None => println!("  doc {} dropped at the coarse stage", d.doc_index),
        }
    }

    println!("\ncompressed text:\n{}", outcome.compressed.render());
    Ok(())
}
