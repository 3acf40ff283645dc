//! HTTP scoring backend.
//!
//! Two profiles share one client: the native wire contract
//! (`POST {base}/v1/logprobs` with token arrays in, logprob array out) and an adapter for
//! OpenAI-compatible completion endpoints that echo prompt logprobs
//! (`POST {base}/v1/completions`, `max_tokens: 0`, `echo: true`).
//!
//! Batching is client-side: `score_batch` fans queries out over a bounded number of
//! concurrent requests (default 4) and returns results in request order. Transport errors
//! and 5xx/429 responses retry with backoff; oversized contexts are truncated from the left
//! when a limit is configured, keeping the most recent tokens.

use std::sync::Mutex;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scorer::{LogProbQuery, LogProbResult, Scorer};

/// Environment variable consulted for a bearer token when the config has no `api_key`.
pub const API_KEY_ENV: &str = "PROMPTPRESS_API_KEY";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HttpProfile {
    /// Native contract: token arrays in, one logprob per continuation token out.
    #[default]
    Wire,
    /// OpenAI-compatible completions endpoint with echoed logprobs.
    OpenaiCompletions,
}

#[derive(Debug, Clone)]
pub struct HttpScorerConfig {
    /// Scheme+host+port, no trailing path (`http://localhost:8737`).
    pub base_url: String,
    pub model: String,
    pub profile: HttpProfile,
    pub max_concurrency: usize,
    /// Extra attempts after the first failure (transport errors, 429, 5xx).
    pub retries: u32,
    pub retry_backoff_ms: u64,
    /// When set, contexts longer than this are truncated from the left before sending.
    pub max_context_tokens: Option<usize>,
    pub api_key: Option<String>,
    pub timeout_ms: u64,
}

impl Default for HttpScorerConfig {
    fn default() -> Self {
        HttpScorerConfig {
            base_url: "http://127.0.0.1:8737".into(),
            model: "default".into(),
            profile: HttpProfile::Wire,
            max_concurrency: 4,
            retries: 2,
            retry_backoff_ms: 50,
            max_context_tokens: None,
            api_key: None,
            timeout_ms: 30_000,
        }
    }
}

pub struct HttpScorer {
    cfg: HttpScorerConfig,
    client: reqwest::blocking::Client,
    model_id: String,
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    context: &'a [String],
    continuation: &'a [String],
}

#[derive(Deserialize)]
struct WireResponse {
    logprobs: Vec<f64>,
    #[serde(default)]
    model: Option<String>,
}

#[derive(Serialize)]
struct CompletionsRequest<'a> {
    model: &'a str,
    prompt: &'a str,
    max_tokens: u32,
    echo: bool,
    logprobs: u32,
}

#[derive(Deserialize)]
struct CompletionsResponse {
    choices: Vec<CompletionsChoice>,
}

#[derive(Deserialize)]
struct CompletionsChoice {
    logprobs: EchoedLogProbs,
}

#[derive(Deserialize)]
struct EchoedLogProbs {
    tokens: Vec<String>,
    token_logprobs: Vec<Option<f64>>,
    text_offset: Vec<usize>,
}

impl HttpScorer {
    pub fn new(cfg: HttpScorerConfig) -> Self {
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_millis(cfg.timeout_ms))
            .build()
            .expect("reqwest client");
        let model_id = format!("http:{}", cfg.model);
        HttpScorer { cfg, client, model_id }
    }

    fn bearer(&self) -> Option<String> {
        self.cfg.api_key.clone().or_else(|| std::env::var(API_KEY_ENV).ok())
    }

    fn post_json(&self, path: &str, body: &impl Serialize) -> Result<serde_json::Value> {
        let url = format!("{}{path}", self.cfg.base_url.trim_end_matches('/'));
        let mut attempt = 0u32;
        loop {
            let mut req = self.client.post(&url).json(body);
            if let Some(key) = self.bearer() {
                req = req.bearer_auth(key);
            }
            let outcome = match req.send() {
                Err(e) => Err(Error::scorer(format!("{url}: {e}"), true)),
                Ok(resp) => {
                    let status = resp.status();
                    if status.as_u16() == 413 {
                        return Err(Error::ContextLength {
                            context_tokens: 0,
                            limit: self.cfg.max_context_tokens.unwrap_or(0),
                        });
                    }
                    let retryable = status.is_server_error() || status.as_u16() == 429;
                    if !status.is_success() {
                        let body = resp.text().unwrap_or_default();
                        Err(Error::scorer(format!("{url}: HTTP {status}: {body}"), retryable))
                    } else {
                        resp.json::<serde_json::Value>()
                            .map_err(|e| Error::ScorerProtocol(format!("{url}: invalid JSON: {e}")))
                    }
                }
            };
            match outcome {
                Ok(v) => return Ok(v),
                Err(Error::Scorer { retryable: true, message }) if attempt < self.cfg.retries => {
                    attempt += 1;
                    let _ = message;
                    std::thread::sleep(Duration::from_millis(self.cfg.retry_backoff_ms * attempt as u64));
                }
                Err(e) => return Err(e),
            }
        }
    }

    /// Left-truncate the context to the configured limit, keeping the most recent tokens.
    fn effective_context<'a>(&self, context: &'a [String]) -> &'a [String] {
        match self.cfg.max_context_tokens {
            Some(limit) if context.len() > limit => &context[context.len() - limit..],
            _ => context,
        }
    }

    fn score_wire(&self, query: &LogProbQuery) -> Result<LogProbResult> {
        let context = self.effective_context(&query.context);
        let value = self.post_json(
            "/v1/logprobs",
            &WireRequest { model: &self.cfg.model, context, continuation: &query.continuation },
        )?;
        let resp: WireResponse = serde_json::from_value(value)
            .map_err(|e| Error::ScorerProtocol(format!("wire response: {e}")))?;
        LogProbResult::checked(
            resp.logprobs,
            query.continuation.len(),
            resp.model.unwrap_or_else(|| self.model_id.clone()),
        )
    }

    /// Adapter path: send the space-joined prompt, attribute echoed endpoint tokens to our
    /// continuation tokens by byte offset, and chain-rule-sum the pieces. An endpoint token
    /// belongs to the continuation token whose span contains its start offset; a null
    /// logprob (the endpoint's first token) contributes 0.
    fn score_openai(&self, query: &LogProbQuery) -> Result<LogProbResult> {
        let context = self.effective_context(&query.context);
        let mut prompt = String::new();
        for t in context.iter() {
            if !prompt.is_empty() {
                prompt.push(' ');
            }
            prompt.push_str(t);
        }
        let mut spans = Vec::with_capacity(query.continuation.len());
        for t in &query.continuation {
            if !prompt.is_empty() {
                prompt.push(' ');
            }
            let start = prompt.len();
            prompt.push_str(t);
            spans.push((start, prompt.len()));
        }

        let value = self.post_json(
            "/v1/completions",
            &CompletionsRequest { model: &self.cfg.model, prompt: &prompt, max_tokens: 0, echo: true, logprobs: 0 },
        )?;
        let resp: CompletionsResponse = serde_json::from_value(value)
            .map_err(|e| Error::ScorerProtocol(format!("completions response: {e}")))?;
        let choice = resp
            .choices
            .into_iter()
            .next()
            .ok_or_else(|| Error::ScorerProtocol("completions response has no choices".into()))?;
        let echoed = choice.logprobs;
        if echoed.tokens.len() != echoed.text_offset.len()
            || echoed.tokens.len() != echoed.token_logprobs.len()
        {
            return Err(Error::ScorerProtocol("echoed logprob arrays disagree in length".into()));
        }

        let mut sums = vec![0.0f64; spans.len()];
        let mut covered = vec![false; spans.len()];
        for (i, &off) in echoed.text_offset.iter().enumerate() {
            if let Some(slot) = spans.iter().position(|&(s, e)| off >= s && off < e) {
                sums[slot] += echoed.token_logprobs[i].unwrap_or(0.0);
                covered[slot] = true;
            }
        }
        if let Some(missing) = covered.iter().position(|&c| !c) {
            return Err(Error::ScorerProtocol(format!(
                "no echoed token covers continuation token {missing}"
            )));
        }
        LogProbResult::checked(sums, query.continuation.len(), self.model_id.clone())
    }
}

impl Scorer for HttpScorer {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn score(&self, query: &LogProbQuery) -> Result<LogProbResult> {
        if query.continuation.is_empty() {
            return Err(Error::InvalidQuery("continuation must be non-empty".into()));
        }
        match self.cfg.profile {
            HttpProfile::Wire => self.score_wire(query),
            HttpProfile::OpenaiCompletions => self.score_openai(query),
        }
    }

    fn score_batch(&self, queries: &[LogProbQuery]) -> Vec<Result<LogProbResult>> {
        let workers = self.cfg.max_concurrency.max(1).min(queries.len());
        if workers <= 1 {
            return queries.iter().map(|q| self.score(q)).collect();
        }
        let next = Mutex::new(0usize);
        let slots: Vec<Mutex<Option<Result<LogProbResult>>>> =
            queries.iter().map(|_| Mutex::new(None)).collect();
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(|| loop {
                    let i = {
                        let mut guard = next.lock().unwrap();
                        let i = *guard;
                        if i >= queries.len() {
                            break;
                        }
                        *guard += 1;
                        i
                    };
                    *slots[i].lock().unwrap() = Some(self.score(&queries[i]));
                });
            }
        });
        slots
            .into_iter()
            .map(|s| s.into_inner().unwrap().expect("worker filled every slot"))
            .collect()
    }
}
