//! The scoring wire contract, shown with raw HTTP.
//!
//! `spawn_server` exposes any `Scorer` on a local port with two endpoints:
//!
//!   POST /v1/logprobs     {"model", "context": [tok], "continuation": [tok]}
//!                         -> {"logprobs": [f64], "model"}
//!   POST /v1/completions  echo profile compatible with OpenAI-style logprob clients
//!
//! This example starts a server around the built-in scorer, sends one request to each
//! endpoint with a plain HTTP client, and prints the exact JSON bodies.
//!
//! ```sh
//! cargo run --example serve_logprobs
//! ```

use std::sync::Arc;

use promptpress::scorer::spawn_server;
use promptpress::{NgramScorer, Scorer};

fn main() -> anyhow::Result<()> {
    let corpus = "tidal bores run up the estuary against the current";
    let scorer: Arc<dyn Scorer> = Arc::new(NgramScorer::from_tokens(corpus.split_whitespace()));
    let server = spawn_server(scorer)?;
    println!("serving on {}", server.url());

    let client = reqwest::blocking::Client::new();

    let request = serde_json::json!({
        "model": "demo",
        "context": ["the", "estuary"],
        "continuation": ["tidal", "bores"],
    });
    println!("\nPOST {}/v1/logprobs", server.url());
    println!("  -> {request}");
    let response: serde_json::Value =
        client.post(format!("{}/v1/logprobs", server.url())).json(&request).send()?.json()?;
    println!("  <- {response}");

    let request = serde_json::json!({
        "model": "demo",
        "prompt": "the estuary tidal bores",
        "max_tokens": 0,
        "echo": true,
        "logprobs": 0,
    });
    println!("\nPOST {}/v1/completions", server.url());
    println!("  -> {request}");
    let response: serde_json::Value =
        client.post(format!("{}/v1/completions", server.url())).json(&request).send()?.json()?;
    println!("  <- {response}");

    server.stop();
    Ok(())
}
