//! Question-aware document ranking on a synthetic haystack, side by side with BM25.
//!
//! The synthetic generator plants one gold document containing the question phrase
//! verbatim and — in `distractor_terms` mode — gives every other document the same term
//! multiset scattered so no two question words touch. Lexical overlap is then identical
//! across documents and BM25 ties, while likelihood under the built-in scorer still
//! separates the contiguous phrase.
//!
//! ```sh
//! cargo run --example rank_documents
//! ```

use promptpress::harness::{generate, Bm25Index, SynthConfig};
use promptpress::{coarse, NgramScorer, SchemeRegistry, StructuredPrompt};

fn main() -> promptpress::Result<()> {
    let case = generate(&SynthConfig {
        num_docs: 8,
        doc_tokens: 60,
        distractor_terms: true,
        seed: 7,
        ..SynthConfig::default()
    });
    println!("question: {:?}", case.question);
    println!("gold document: {}", case.gold_doc_index);

    let registry = SchemeRegistry::default();
    let prompt = StructuredPrompt::from_texts(
        &registry,
        "whitespace",
        &case.instruction,
        &case.documents,
        &case.question,
        promptpress::prompt::DEFAULT_RESTRICT,
    )?;

    let scorer = NgramScorer::from_corpus(&prompt.corpus_text(), &promptpress::token::WhitespaceScheme);
    let ranked = coarse::rank_documents(&prompt, &scorer)?;

    let bm25 = Bm25Index::new(&case.documents);

    println!("\n{:<6} {:<6} {:>12} {:>12}", "rank", "doc", "importance", "bm25");
    for scored in &ranked {
        let gold = if scored.doc_index == case.gold_doc_index { "  <- gold" } else { "" };
        println!(
            "{:<6} {:<6} {:>12.5} {:>12.5}{}",
            scored.rank_index,
            scored.doc_index,
            scored.importance,
            bm25.score(&case.question, scored.doc_index),
            gold
        );
    }

    println!(
        "\nlikelihood ranking puts doc {} first; BM25's tied argmax is doc {}",
        ranked[0].doc_index,
        bm25.top1(&case.question).unwrap()
    );
    Ok(())
}
