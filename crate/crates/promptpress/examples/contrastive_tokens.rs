//! Per-token contrastive scores: how much more predictable a token becomes once the
//! question is in front of it.
//!
//! Each token is scored twice — once under the running compressed prefix alone, once
//! with the question prepended — and keeps the difference of the two surprisals.
//! Tokens the question "explains" score high and survive pruning; generic filler does
//! not.
//!
//! ```sh
//! cargo run --example contrastive_tokens
//! ```

use promptpress::fine::{contrastive_scores, QuestionPosition};
use promptpress::token::WhitespaceScheme;
use promptpress::{NgramScorer, SchemeRegistry, SectionId};

fn main() -> promptpress::Result<()> {
    let registry = SchemeRegistry::default();
    let doc = "the meadow stretched on and the copper kettle whistled while rain fell on the meadow";
    let question = "who owns the copper kettle";

    let section = registry.tokenize(doc, "whitespace", SectionId::Document(0))?;
    let que = registry.tokenize(question, "whitespace", SectionId::Question)?;
    let scorer = NgramScorer::from_corpus(&format!("{doc}\n{question}"), &WhitespaceScheme);

    let scores = contrastive_scores(
        &section,
        0..section.len(),
        &que,
        &[],
        &scorer,
        QuestionPosition::Before,
    )?;

    let mut by_score = scores;
    by_score.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.index.cmp(&b.index)));

    println!("{:<4} {:<10} {:>9} {:>9} {:>9}", "idx", "token", "plain", "with q", "contrast");
    for s in &by_score {
        println!(
            "{:<4} {:<10} {:>9.4} {:>9.4} {:>9.4}",
            s.index,
            section.token(s.index),
            s.base_nll,
            s.cond_nll,
            s.score
        );
    }
    println!("\nquestion words and their neighbours float to the top.");
    Ok(())
}
