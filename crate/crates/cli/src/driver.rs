use std::time::Duration;

use log::{info, warn};
use mtsem_backend::{CompletionBackend, CompletionRequest};
use mtsem_core::promptgen::{parse_response, ResponseError};
use mtsem_core::{MtIrStar, RuntimeValue};

use crate::CliError;

pub struct Invocation<'a> {
    pub ir: &'a MtIrStar,
    /// The assembled prompt, sent unchanged on the first attempt.
    pub prompt: &'a str,
    pub model: String,
    pub retries: u32,
    pub timeout: Duration,
}

/// The single line appended to the prompt when re-asking after a bad reply.
pub fn corrective_suffix(error: &ResponseError, ir: &MtIrStar) -> String {
    let reason = error.to_string().replace(['\n', '\r'], " ");
    format!(
        "Your previous reply was rejected ({reason}). Return only a value of type {}.\n",
        ir.output.item
    )
}

/// Sends the prompt, parses the reply against the output type, and re-asks
/// up to `retries` times on parse or type errors. Backend errors end the call.
pub fn invoke(
    backend: &dyn CompletionBackend,
    inv: &Invocation<'_>,
) -> Result<RuntimeValue, CliError> {
    let mut prompt = inv.prompt.to_string();
    let mut attempt = 0;
    loop {
        attempt += 1;
        let mut req = CompletionRequest::new(prompt.as_str(), inv.model.as_str());
        req.timeout = inv.timeout;
        let reply = backend.complete(&req)?;
        info!("attempt {attempt}: {} byte reply", reply.text.len());
        match parse_response(&reply.text, &inv.ir.output.item, inv.ir) {
            Ok(v) => return Ok(v),
            Err(e) if attempt <= inv.retries => {
                warn!("attempt {attempt} rejected: {e}");
                prompt = format!("{}{}", inv.prompt, corrective_suffix(&e, inv.ir));
            }
            Err(ResponseError::Parse(error)) => {
                return Err(CliError::Parse {
                    error,
                    attempts: attempt,
                })
            }
            Err(ResponseError::Type(error)) => {
                return Err(CliError::Type {
                    error,
                    attempts: attempt,
                })
            }
        }
    }
}
