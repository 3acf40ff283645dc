//! The built-in interpolated bigram scorer: fit on a corpus, then ask for per-token
//! log-probabilities of a continuation under a given context.
//!
//! The context tokens are folded into the working count tables for the duration of the
//! query, so a continuation becomes more likely when the context already used its words —
//! which is exactly the signal the ranking and pruning stages consume.
//!
//! ```sh
//! cargo run --example builtin_scorer
//! ```

use promptpress::{LogProbQuery, NgramScorer, Scorer};

fn main() -> promptpress::Result<()> {
    let corpus = "the narwhal surfaced near the floe \
                  the floe drifted north \
                  a narwhal tusk is one long tooth";
    let scorer = NgramScorer::from_tokens(corpus.split_whitespace());
    println!("model: {}", scorer.model_id());

    let continuation: Vec<String> =
        ["the", "narwhal", "surfaced"].iter().map(|s| s.to_string()).collect();

    // Same continuation under two contexts of equal length. The related one re-uses the
    // continuation's own words, so its query-time counts prime exactly the n-grams being
    // scored; the unrelated one only dilutes the tables with new vocabulary.
    let related: Vec<String> =
        ["narwhal", "pods", "surfaced", "near", "the", "floe"].iter().map(|s| s.to_string()).collect();
    let unrelated: Vec<String> =
        ["quartz", "pendulum", "clocks", "tick", "rather", "slowly"].iter().map(|s| s.to_string()).collect();

    let primed = scorer.score(&LogProbQuery::new(related, continuation.clone())?)?;
    let diluted = scorer.score(&LogProbQuery::new(unrelated, continuation.clone())?)?;

    println!("\n{:<10} {:>12} {:>14}", "token", "related ctx", "unrelated ctx");
    for ((tok, a), b) in continuation.iter().zip(&primed.logprobs).zip(&diluted.logprobs) {
        println!("{tok:<10} {a:>12.4} {b:>14.4}");
    }
    println!("{:<10} {:>12.4} {:>14.4}", "total", primed.sum(), diluted.sum());

    assert!(primed.sum() > diluted.sum(), "related context should raise likelihood");
    println!("\ncontrast (related − unrelated): {:+.4}", primed.sum() - diluted.sum());
    Ok(())
}
