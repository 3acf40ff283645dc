use thiserror::Error;

/// Crate-wide error type. Variants are grouped by the surface that raises them so the
/// CLI can map them onto its exit codes (config = 1, I/O = 2, scorer = 3).
#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown tokenization scheme `{0}`")]
    UnknownScheme(String),

    #[error("scheme mismatch: {left} vs {right}")]
    SchemeMismatch { left: String, right: String },

    #[error("invalid token sequence: {0}")]
    InvalidTokens(String),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("scorer backend failure{}: {message}", if *.retryable { " (retryable)" } else { "" })]
    Scorer { message: String, retryable: bool },

    #[error("context length exceeded: {context_tokens} tokens over backend limit {limit}; truncate from the left")]
    ContextLength { context_tokens: usize, limit: usize },

    #[error("scorer protocol violation: {0}")]
    ScorerProtocol(String),

    #[error("infeasible budget: instruction+question reservations ({reserved} tokens) leave no room under target {target}")]
    InfeasibleBudget { reserved: usize, target: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: malformed JSONL record: {message}")]
    Jsonl { line: usize, message: String },
}

impl Error {
    pub fn scorer(message: impl Into<String>, retryable: bool) -> Self {
        Error::Scorer { message: message.into(), retryable }
    }

    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    /// Exit code the CLI maps this error onto.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::UnknownScheme(_) | Error::InfeasibleBudget { .. } => 1,
            Error::Io { .. } | Error::Jsonl { .. } => 2,
            Error::Scorer { .. } | Error::ContextLength { .. } | Error::ScorerProtocol(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
