//! Minimal completions client for end-to-end benchmarks: send a (compressed) prompt to an
//! OpenAI-compatible endpoint and return the generated text. Greedy decoding, so benchmark
//! accuracy is reproducible against a deterministic backend.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Serialize)]
struct CompletionRequest<'a> {
    model: &'a str,
    prompt: &'a str,
    max_tokens: usize,
    temperature: f64,
}

#[derive(Deserialize)]
struct CompletionResponse {
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    text: String,
}

pub struct CompletionClient {
    base_url: String,
    model: String,
    api_key: Option<String>,
    client: reqwest::blocking::Client,
}

impl CompletionClient {
    pub fn new(base_url: impl Into<String>, model: impl Into<String>) -> Self {
        CompletionClient {
            base_url: base_url.into().trim_end_matches('/').to_string(),
            model: model.into(),
            api_key: std::env::var(crate::scorer::API_KEY_ENV).ok(),
            client: reqwest::blocking::Client::builder()
                .timeout(Duration::from_secs(60))
                .build()
                .expect("client construction cannot fail with static options"),
        }
    }

    pub fn complete(&self, prompt: &str, max_tokens: usize) -> Result<String> {
        let body = CompletionRequest { model: &self.model, prompt, max_tokens, temperature: 0.0 };
        let mut req = self
            .client
            .post(format!("{}/v1/completions", self.base_url))
            .json(&body);
        if let Some(key) = &self.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(|e| Error::scorer(format!("completion: {e}"), true))?;
        let status = resp.status();
        if !status.is_success() {
            return Err(Error::scorer(format!("completion: status {status}"), false));
        }
        let parsed: CompletionResponse = resp
            .json()
            .map_err(|e| Error::ScorerProtocol(format!("completion body: {e}")))?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.text)
            .ok_or_else(|| Error::ScorerProtocol("completion returned no choices".into()))
    }
}
