//! Completion backends: a scripted mock for deterministic runs and a blocking
//! client for OpenAI-compatible chat-completion services.

mod http;
mod mock;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use http::{HttpBackend, HttpConfig, ENV_API_BASE, ENV_API_KEY, ENV_MODEL};
pub use mock::{prompt_hash, MatchKind, MockBackend, ScriptEntry};

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionRequest {
    pub prompt: String,
    pub model: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout: Duration,
}

impl CompletionRequest {
    pub fn new(prompt: impl Into<String>, model: impl Into<String>) -> CompletionRequest {
        CompletionRequest {
            prompt: prompt.into(),
            model: model.into(),
            temperature: 0.0,
            max_tokens: 1024,
            timeout: Duration::from_secs(60),
        }
    }

    pub fn validate(&self) -> Result<(), BackendError> {
        if !(0.0..=2.0).contains(&self.temperature) {
            return Err(BackendError::InvalidRequest(format!(
                "temperature {} outside [0, 2]",
                self.temperature
            )));
        }
        if self.max_tokens == 0 {
            return Err(BackendError::InvalidRequest(
                "max_tokens must be at least 1".into(),
            ));
        }
        if self.timeout.is_zero() {
            return Err(BackendError::InvalidRequest(
                "timeout must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Usage {
    pub prompt_tokens: u64,
    pub completion_tokens: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompletionResult {
    pub text: String,
    pub usage: Option<Usage>,
    pub latency: Duration,
    /// HTTP attempts made, including the successful one.
    pub attempts: u32,
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("invalid request: {0}")]
    InvalidRequest(String),
    #[error("unscripted prompt (sha256 {hash})")]
    Unscripted { hash: String },
    #[error("bad mock script: {0}")]
    Script(String),
    #[error("backend not configured: {0}")]
    Config(String),
    #[error("transport failure: {0}")]
    Transport(String),
    #[error("request timed out after {0:?}")]
    Timeout(Duration),
    #[error("HTTP {status} after {attempts} attempt(s): {body}")]
    Status {
        status: u16,
        body: String,
        attempts: u32,
    },
    #[error("malformed response envelope: {0}")]
    Malformed(String),
}

/// One completion per call. Implementations are shared across threads.
pub trait CompletionBackend: Send + Sync {
    fn complete(&self, req: &CompletionRequest) -> Result<CompletionResult, BackendError>;
}

impl<B: CompletionBackend + ?Sized> CompletionBackend for Box<B> {
    fn complete(&self, req: &CompletionRequest) -> Result<CompletionResult, BackendError> {
        (**self).complete(req)
    }
}

impl<B: CompletionBackend + ?Sized> CompletionBackend for &B {
    fn complete(&self, req: &CompletionRequest) -> Result<CompletionResult, BackendError> {
        (**self).complete(req)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn request_validation() {
        let ok = CompletionRequest::new("p", "m");
        assert!(ok.validate().is_ok());
        assert_eq!(ok.temperature, 0.0);
        for bad in [
            CompletionRequest {
                temperature: 2.5,
                ..ok.clone()
            },
            CompletionRequest {
                temperature: -0.1,
                ..ok.clone()
            },
            CompletionRequest {
                temperature: f64::NAN,
                ..ok.clone()
            },
            CompletionRequest {
                max_tokens: 0,
                ..ok.clone()
            },
            CompletionRequest {
                timeout: Duration::ZERO,
                ..ok.clone()
            },
        ] {
            assert!(matches!(
                bad.validate(),
                Err(BackendError::InvalidRequest(_))
            ));
        }
        let edge = CompletionRequest {
            temperature: 2.0,
            max_tokens: 1,
            ..ok
        };
        assert!(edge.validate().is_ok());
    }
}
