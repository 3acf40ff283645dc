//! Pipeline configuration: one serializable struct covering budgets, schedules, scheme
//! choices, and the scorer backend. Every knob has a default tuned for multi-document QA
//! prompts, so `PipelineConfig::default()` is a working configuration.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fine::QuestionPosition;
use crate::prompt::DEFAULT_RESTRICT;
use crate::scorer::{
    HttpProfile, HttpScorer, HttpScorerConfig, NgramScorer, Scorer, API_KEY_ENV,
};
use crate::token::SchemeRegistry;

/// Per-token pricing used for the estimated-savings line of the report.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Prices {
    /// Price per 1000 input tokens.
    pub input_per_1k: f64,
}

/// Scoring backend selection.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScorerConfig {
    /// In-process n-gram model. With `corpus` unset, the model is fitted to the prompt
    /// being compressed — zero-setup and fully deterministic.
    Builtin {
        #[serde(default)]
        corpus: Option<PathBuf>,
    },
    /// Remote model speaking either the native logprob endpoint or the echo-completions
    /// dialect. The API key, if any, is taken from the environment, never from the file.
    Http {
        url: String,
        model: String,
        #[serde(default)]
        profile: HttpProfile,
        #[serde(default = "default_concurrency")]
        max_concurrency: usize,
        #[serde(default)]
        max_context_tokens: Option<usize>,
        #[serde(default = "default_retries")]
        retries: u32,
    },
}

fn default_concurrency() -> usize {
    4
}

fn default_retries() -> u32 {
    2
}

impl Default for ScorerConfig {
    fn default() -> Self {
        ScorerConfig::Builtin { corpus: None }
    }
}

impl ScorerConfig {
    /// Instantiate the backend. `self_corpus` is the text the builtin model falls back to
    /// when no corpus file is configured — callers pass the prompt being compressed.
    pub fn build(
        &self,
        registry: &SchemeRegistry,
        scorer_scheme: &str,
        self_corpus: &str,
    ) -> Result<Arc<dyn Scorer>> {
        match self {
            ScorerConfig::Builtin { corpus } => {
                let scheme = registry.get(scorer_scheme)?;
                let scorer = match corpus {
                    Some(path) => {
                        let text = std::fs::read_to_string(path)
                            .map_err(|e| Error::io(path.display().to_string(), e))?;
                        NgramScorer::from_corpus(&text, scheme.as_ref())
                    }
                    None => NgramScorer::from_corpus(self_corpus, scheme.as_ref())
                        .with_model_id("ngram-self"),
                };
                Ok(Arc::new(scorer))
            }
            ScorerConfig::Http {
                url,
                model,
                profile,
                max_concurrency,
                max_context_tokens,
                retries,
            } => {
                let cfg = HttpScorerConfig {
                    base_url: url.clone(),
                    model: model.clone(),
                    profile: *profile,
                    max_concurrency: (*max_concurrency).max(1),
                    retries: *retries,
                    max_context_tokens: *max_context_tokens,
                    api_key: std::env::var(API_KEY_ENV).ok(),
                    ..HttpScorerConfig::default()
                };
                Ok(Arc::new(HttpScorer::new(cfg)))
            }
        }
    }
}

/// Everything the compression pipeline needs to know. Exactly one of `target_tokens` and
/// `ratio` must be set.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Absolute token budget for the compressed prompt.
    pub target_tokens: Option<usize>,
    /// Compression factor; the budget becomes ceil(original / ratio).
    pub ratio: Option<f64>,
    /// Retention ratio for the instruction section.
    pub tau_ins: f64,
    /// Retention ratio for the question section.
    pub tau_que: f64,
    /// Half-width of the rank-linear retention schedule across documents.
    pub delta_tau: f64,
    /// Coarse-stage document budget as a multiple of the target.
    pub granular_k: f64,
    /// Tokens per fine-stage segment.
    pub segment_size: usize,
    /// Emit retained documents most-relevant-first instead of original order.
    pub reorder: bool,
    /// Statement appended to the question during document ranking only.
    pub restrict_text: String,
    /// Question placement for the conditioned scoring pass.
    pub question_position: QuestionPosition,
    /// Minimum response-match length (in tokens) the recovery index acts on.
    pub min_match_tokens: usize,
    /// Tokenization scheme for prompt sections — budget counting happens in these tokens.
    pub budget_scheme: String,
    /// Tokenization scheme for the builtin scorer's corpus.
    pub scorer_scheme: String,
    pub scorer: ScorerConfig,
    pub prices: Option<Prices>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            target_tokens: None,
            ratio: None,
            tau_ins: 0.85,
            tau_que: 0.9,
            delta_tau: 0.3,
            granular_k: 2.0,
            segment_size: 200,
            reorder: true,
            restrict_text: DEFAULT_RESTRICT.to_string(),
            question_position: QuestionPosition::Before,
            min_match_tokens: 1,
            budget_scheme: "whitespace".to_string(),
            scorer_scheme: "whitespace".to_string(),
            scorer: ScorerConfig::default(),
            prices: None,
        }
    }
}

impl PipelineConfig {
    pub fn with_target(target_tokens: usize) -> Self {
        PipelineConfig { target_tokens: Some(target_tokens), ..Default::default() }
    }

    pub fn with_ratio(ratio: f64) -> Self {
        PipelineConfig { ratio: Some(ratio), ..Default::default() }
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(path.display().to_string(), e))?;
        let cfg: PipelineConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |name: &str, v: f64| -> Result<()> {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(Error::Config(format!("{name} must lie in [0, 1], got {v}")));
            }
            Ok(())
        };
        unit("tau_ins", self.tau_ins)?;
        unit("tau_que", self.tau_que)?;
        unit("delta_tau", self.delta_tau)?;
        if !self.granular_k.is_finite() || self.granular_k < 1.0 {
            return Err(Error::Config(format!("granular_k must be >= 1, got {}", self.granular_k)));
        }
        if self.segment_size == 0 {
            return Err(Error::Config("segment_size must be positive".into()));
        }
        if let Some(r) = self.ratio {
            if !r.is_finite() || r < 1.0 {
                return Err(Error::Config(format!("ratio must be >= 1, got {r}")));
            }
        }
        if self.target_tokens == Some(0) {
            return Err(Error::Config("target_tokens must be positive".into()));
        }
        Ok(())
    }

    /// Resolve the token budget for a prompt of `original_tokens`. Exactly one of
    /// `target_tokens` / `ratio` may be set.
    pub fn target_for(&self, original_tokens: usize) -> Result<usize> {
        match (self.target_tokens, self.ratio) {
            (Some(_), Some(_)) => {
                Err(Error::Config("set either target_tokens or ratio, not both".into()))
            }
            (None, None) => Err(Error::Config("one of target_tokens or ratio is required".into())),
            (Some(t), None) => Ok(t),
            (None, Some(r)) => {
                let t = (original_tokens as f64 / r - 1e-9).ceil().max(1.0) as usize;
                Ok(t)
            }
        }
    }
}
