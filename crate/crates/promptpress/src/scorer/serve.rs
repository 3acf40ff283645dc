//! Reference server for the scoring wire contract, backed by any [`Scorer`].
//!
//! Serves `POST /v1/logprobs` (the native contract) and `POST /v1/completions` (an
//! OpenAI-compatible completions endpoint with echoed logprobs, driven by whitespace
//! tokenization of the prompt). Hand-rolled over std::net on purpose: the contract is a
//! single JSON POST, and examples/tests can spin it up with no runtime dependencies.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;

use serde::{Deserialize, Serialize};

use crate::scorer::{LogProbQuery, Scorer};
use crate::token::{Scheme, WhitespaceScheme};

#[derive(Deserialize)]
struct WireRequest {
    #[serde(default)]
    #[allow(dead_code)]
    model: Option<String>,
    context: Vec<String>,
    continuation: Vec<String>,
}

#[derive(Serialize)]
struct WireResponse<'a> {
    logprobs: &'a [f64],
    model: &'a str,
}

#[derive(Deserialize)]
struct CompletionsRequest {
    #[serde(default)]
    #[allow(dead_code)]
    model: Option<String>,
    prompt: String,
}

#[derive(Serialize)]
struct CompletionsResponse {
    choices: Vec<CompletionsChoice>,
}

#[derive(Serialize)]
struct CompletionsChoice {
    text: String,
    logprobs: EchoedLogProbs,
}

#[derive(Serialize)]
struct EchoedLogProbs {
    tokens: Vec<String>,
    token_logprobs: Vec<Option<f64>>,
    text_offset: Vec<usize>,
}

/// Running server; dropping it without calling [`ServerHandle::stop`] leaves the thread
/// parked on accept until process exit.
pub struct ServerHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    join: Option<JoinHandle<()>>,
}

impl ServerHandle {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Base URL (no path) for pointing an HTTP scorer at this server.
    pub fn url(&self) -> String {
        format!("http://{}", self.addr)
    }

    pub fn stop(mut self) {
        self.stop.store(true, Ordering::SeqCst);
        // unblock the accept loop
        let _ = TcpStream::connect(self.addr);
        if let Some(j) = self.join.take() {
            let _ = j.join();
        }
    }
}

/// Bind an ephemeral loopback port and serve `scorer` until stopped.
pub fn spawn_server(scorer: Arc<dyn Scorer>) -> std::io::Result<ServerHandle> {
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let addr = listener.local_addr()?;
    let stop = Arc::new(AtomicBool::new(false));
    let stop2 = stop.clone();
    let join = std::thread::spawn(move || {
        for conn in listener.incoming() {
            if stop2.load(Ordering::SeqCst) {
                break;
            }
            if let Ok(stream) = conn {
                let scorer = scorer.clone();
                std::thread::spawn(move || {
                    let _ = handle(stream, scorer.as_ref());
                });
            }
        }
    });
    Ok(ServerHandle { addr, stop, join: Some(join) })
}

fn handle(stream: TcpStream, scorer: &dyn Scorer) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut request_line = String::new();
    reader.read_line(&mut request_line)?;
    let mut parts = request_line.split_whitespace();
    let method = parts.next().unwrap_or_default().to_string();
    let path = parts.next().unwrap_or_default().to_string();

    let mut content_length = 0usize;
    loop {
        let mut line = String::new();
        reader.read_line(&mut line)?;
        let line = line.trim_end();
        if line.is_empty() {
            break;
        }
        if let Some((name, value)) = line.split_once(':') {
            if name.eq_ignore_ascii_case("content-length") {
                content_length = value.trim().parse().unwrap_or(0);
            }
        }
    }
    let mut body = vec![0u8; content_length];
    reader.read_exact(&mut body)?;

    let (status, payload) = route(&method, &path, &body, scorer);
    respond(stream, status, &payload)
}

fn route(method: &str, path: &str, body: &[u8], scorer: &dyn Scorer) -> (u16, String) {
    if method != "POST" {
        return (404, r#"{"error":"not found"}"#.into());
    }
    match path {
        "/v1/logprobs" => match serde_json::from_slice::<WireRequest>(body) {
            Err(e) => (400, format!(r#"{{"error":{}}}"#, serde_json::to_string(&e.to_string()).unwrap())),
            Ok(req) => match LogProbQuery::new(req.context, req.continuation)
                .and_then(|q| scorer.score(&q))
            {
                Ok(res) => (
                    200,
                    serde_json::to_string(&WireResponse { logprobs: &res.logprobs, model: &res.model_id })
                        .unwrap(),
                ),
                Err(e) => (500, format!(r#"{{"error":{}}}"#, serde_json::to_string(&e.to_string()).unwrap())),
            },
        },
        "/v1/completions" => match serde_json::from_slice::<CompletionsRequest>(body) {
            Err(e) => (400, format!(r#"{{"error":{}}}"#, serde_json::to_string(&e.to_string()).unwrap())),
            Ok(req) => match echo_completions(&req.prompt, scorer) {
                Ok(resp) => (200, serde_json::to_string(&resp).unwrap()),
                Err(e) => (500, format!(r#"{{"error":{}}}"#, serde_json::to_string(&e.to_string()).unwrap())),
            },
        },
        _ => (404, r#"{"error":"not found"}"#.into()),
    }
}

/// Echo the prompt's own tokens with their logprobs, OpenAI-completions style.
/// The first token has no context and reports a null logprob, as real endpoints do.
fn echo_completions(prompt: &str, scorer: &dyn Scorer) -> crate::error::Result<CompletionsResponse> {
    let scheme = WhitespaceScheme;
    let spans = scheme.spans(prompt);
    let tokens: Vec<String> = spans.iter().map(|&(s, e)| prompt[s as usize..e as usize].to_string()).collect();
    let mut token_logprobs: Vec<Option<f64>> = Vec::with_capacity(tokens.len());
    if !tokens.is_empty() {
        let res = scorer.score(&LogProbQuery::new(vec![], tokens.clone())?)?;
        for (i, lp) in res.logprobs.into_iter().enumerate() {
            token_logprobs.push(if i == 0 { None } else { Some(lp) });
        }
    }
    Ok(CompletionsResponse {
        choices: vec![CompletionsChoice {
            text: String::new(),
            logprobs: EchoedLogProbs {
                tokens,
                token_logprobs,
                text_offset: spans.iter().map(|&(s, _)| s as usize).collect(),
            },
        }],
    })
}

fn respond(mut stream: TcpStream, status: u16, body: &str) -> std::io::Result<()> {
    let reason = match status {
        200 => "OK",
        400 => "Bad Request",
        404 => "Not Found",
        _ => "Internal Server Error",
    };
    write!(
        stream,
        "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )?;
    stream.flush()
}
