use std::path::Path;
use std::sync::Mutex;
use std::time::Duration;

use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::{BackendError, CompletionBackend, CompletionRequest, CompletionResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchKind {
    /// The whole prompt equals the pattern.
    Exact,
    /// The prompt contains the pattern.
    Contains,
    /// The pattern is the hex SHA-256 of the prompt.
    Hash,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct ScriptEntry {
    #[serde(rename = "match")]
    pub kind: MatchKind,
    pub pattern: String,
    pub reply: String,
}

impl ScriptEntry {
    fn matches(&self, prompt: &str, hash: &str) -> bool {
        match self.kind {
            MatchKind::Exact => prompt == self.pattern,
            MatchKind::Contains => prompt.contains(&self.pattern),
            MatchKind::Hash => hash.eq_ignore_ascii_case(&self.pattern),
        }
    }
}

pub fn prompt_hash(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

/// Replies from a fixed script; the first matching entry wins. Every prompt
/// received is recorded.
#[derive(Debug, Default)]
pub struct MockBackend {
    script: Vec<ScriptEntry>,
    fallback: Option<String>,
    recorded: Mutex<Vec<String>>,
}

impl MockBackend {
    pub fn new(script: Vec<ScriptEntry>) -> MockBackend {
        MockBackend {
            script,
            ..MockBackend::default()
        }
    }

    /// Answers every prompt with `reply`.
    pub fn echo(reply: impl Into<String>) -> MockBackend {
        MockBackend {
            fallback: Some(reply.into()),
            ..MockBackend::default()
        }
    }

    pub fn from_json(text: &str) -> Result<MockBackend, BackendError> {
        serde_json::from_str(text)
            .map(MockBackend::new)
            .map_err(|e| BackendError::Script(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<MockBackend, BackendError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| BackendError::Script(format!("{}: {e}", path.display())))?;
        MockBackend::from_json(&text)
    }

    /// Prompts received so far, in call order.
    pub fn recorded(&self) -> Vec<String> {
        self.recorded.lock().unwrap().clone()
    }
}

impl CompletionBackend for MockBackend {
    fn complete(&self, req: &CompletionRequest) -> Result<CompletionResult, BackendError> {
        req.validate()?;
        self.recorded.lock().unwrap().push(req.prompt.clone());
        let hash = prompt_hash(&req.prompt);
        let reply = self
            .script
            .iter()
            .find(|e| e.matches(&req.prompt, &hash))
            .map(|e| e.reply.clone())
            .or_else(|| self.fallback.clone())
            .ok_or(BackendError::Unscripted { hash })?;
        Ok(CompletionResult {
            text: reply,
            usage: None,
            latency: Duration::ZERO,
            attempts: 1,
        })
    }
}
