use std::thread;
use std::time::{Duration, Instant};

use log::{debug, warn};
use serde::Deserialize;
use serde_json::json;

use crate::{BackendError, CompletionBackend, CompletionRequest, CompletionResult, Usage};

pub const ENV_API_BASE: &str = "MTSEM_API_BASE";
pub const ENV_API_KEY: &str = "MTSEM_API_KEY";
pub const ENV_MODEL: &str = "MTSEM_MODEL";

const BODY_EXCERPT: usize = 300;

#[derive(Debug, Clone, PartialEq)]
pub struct HttpConfig {
    /// Service root, e.g. `https://api.openai.com` or `http://localhost:8080/v1`.
    pub api_base: String,
    pub api_key: Option<String>,
    pub model: String,
    /// Total attempts for 429 and 5xx responses.
    pub max_attempts: u32,
    pub initial_backoff: Duration,
}

impl HttpConfig {
    pub fn new(api_base: impl Into<String>) -> HttpConfig {
        HttpConfig {
            api_base: api_base.into(),
            api_key: None,
            model: "gpt-4o".into(),
            max_attempts: 3,
            initial_backoff: Duration::from_millis(500),
        }
    }

    /// Reads `MTSEM_API_BASE`, `MTSEM_API_KEY` and `MTSEM_MODEL`.
    pub fn from_env() -> Result<HttpConfig, BackendError> {
        let base = std::env::var(ENV_API_BASE)
            .map_err(|_| BackendError::Config(format!("{ENV_API_BASE} is not set")))?;
        let mut cfg = HttpConfig::new(base);
        cfg.api_key = std::env::var(ENV_API_KEY).ok().filter(|k| !k.is_empty());
        if let Ok(model) = std::env::var(ENV_MODEL) {
            cfg.model = model;
        }
        Ok(cfg)
    }

    pub fn endpoint(&self) -> String {
        let base = self.api_base.trim_end_matches('/');
        if base.ends_with("/v1") {
            format!("{base}/chat/completions")
        } else {
            format!("{base}/v1/chat/completions")
        }
    }
}

#[derive(Deserialize)]
struct Envelope {
    choices: Vec<Choice>,
    usage: Option<Usage>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    content: Option<String>,
}

pub struct HttpBackend {
    config: HttpConfig,
    client: reqwest::blocking::Client,
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Result<HttpBackend, BackendError> {
        let client = reqwest::blocking::Client::builder()
            .build()
            .map_err(|e| BackendError::Transport(e.to_string()))?;
        Ok(HttpBackend { config, client })
    }

    pub fn config(&self) -> &HttpConfig {
        &self.config
    }

    fn send(&self, req: &CompletionRequest) -> Result<(u16, String), BackendError> {
        let body = json!({
            "model": req.model,
            "messages": [{"role": "user", "content": req.prompt}],
            "temperature": req.temperature,
            "max_tokens": req.max_tokens,
        });
        let mut builder = self
            .client
            .post(self.config.endpoint())
            .timeout(req.timeout)
            .json(&body);
        if let Some(key) = &self.config.api_key {
            builder = builder.bearer_auth(key);
        }
        let resp = builder.send().map_err(|e| classify(e, req.timeout))?;
        let status = resp.status().as_u16();
        let text = resp.text().map_err(|e| classify(e, req.timeout))?;
        Ok((status, text))
    }
}

fn classify(e: reqwest::Error, timeout: Duration) -> BackendError {
    if e.is_timeout() {
        BackendError::Timeout(timeout)
    } else {
        BackendError::Transport(e.to_string())
    }
}

fn excerpt(body: &str) -> String {
    match body.char_indices().nth(BODY_EXCERPT) {
        Some((i, _)) => format!("{}...", &body[..i]),
        None => body.to_string(),
    }
}

fn parse_envelope(body: &str) -> Result<(String, Option<Usage>), BackendError> {
    let env: Envelope = serde_json::from_str(body)
        .map_err(|e| BackendError::Malformed(format!("{e}: {}", excerpt(body))))?;
    let first = env
        .choices
        .into_iter()
        .next()
        .ok_or_else(|| BackendError::Malformed("no choices".into()))?;
    let text = first
        .message
        .content
        .ok_or_else(|| BackendError::Malformed("first choice has no content".into()))?;
    Ok((text, env.usage))
}

impl CompletionBackend for HttpBackend {
    fn complete(&self, req: &CompletionRequest) -> Result<CompletionResult, BackendError> {
        req.validate()?;
        let started = Instant::now();
        let mut backoff = self.config.initial_backoff;
        let mut attempts = 0;
        loop {
            attempts += 1;
            let (status, body) = self.send(req)?;
            if (200..300).contains(&status) {
                let (text, usage) = parse_envelope(&body)?;
                debug!(
                    "completion in {attempts} attempt(s), {:?}",
                    started.elapsed()
                );
                return Ok(CompletionResult {
                    text,
                    usage,
                    latency: started.elapsed(),
                    attempts,
                });
            }
            let retryable = status == 429 || (500..600).contains(&status);
            if !retryable || attempts >= self.config.max_attempts.max(1) {
                return Err(BackendError::Status {
                    status,
                    body: excerpt(&body),
                    attempts,
                });
            }
            warn!("HTTP {status}, retrying in {backoff:?}");
            thread::sleep(backoff);
            backoff = backoff.saturating_mul(2);
        }
    }
}
