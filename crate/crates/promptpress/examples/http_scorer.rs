//! Scoring over HTTP with `HttpScorer`, in both wire profiles.
//!
//! The native profile speaks `/v1/logprobs` directly. The `openai_completions` profile
//! drives an OpenAI-style completions endpoint in echo mode and reads per-token logprobs
//! out of the response. Both are exercised here against an in-process server wrapping the
//! built-in scorer, and both must agree with calling that scorer directly.
//!
//! ```sh
//! cargo run --example http_scorer
//! ```

use std::sync::Arc;

use promptpress::scorer::{spawn_server, HttpProfile};
use promptpress::{HttpScorer, HttpScorerConfig, LogProbQuery, NgramScorer, Scorer};

fn main() -> anyhow::Result<()> {
    let corpus = "glacier melt feeds the braided river every summer";
    let local = Arc::new(NgramScorer::from_tokens(corpus.split_whitespace()));
    let server = spawn_server(local.clone())?;

    let query = LogProbQuery::new(
        vec!["the".into(), "braided".into()],
        vec!["river".into(), "glacier".into(), "melt".into()],
    )?;
    let direct = local.score(&query)?;
    println!("in-process: {:?}", direct.logprobs);

    for profile in [HttpProfile::Wire, HttpProfile::OpenaiCompletions] {
        let remote = HttpScorer::new(HttpScorerConfig {
            base_url: server.url(),
            model: "demo".into(),
            profile,
            ..HttpScorerConfig::default()
        });
        let over_http = remote.score(&query)?;
        println!("{profile:?}: {:?}", over_http.logprobs);
        let drift: f64 = direct
            .logprobs
            .iter()
            .zip(&over_http.logprobs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        println!("  max drift vs in-process: {drift:.2e}");
        assert!(drift < 1e-6);
    }

    server.stop();
    Ok(())
}
