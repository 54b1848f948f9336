use std::thread;
use std::time::Duration;

use log::{debug, warn};
use trajgen_core::codec::{parse_codes_with, CodecConfig};
use trajgen_core::CodeBundle;

use crate::{build_prompt, ChatProvider, LlmError, Message, ProviderError, Role};

/// Sent back to the model, followed by the parse error, when its first reply
/// cannot be parsed.
pub const REPAIR_INSTRUCTION: &str = "Your previous answer could not be parsed. \
Reply again using exactly the Vehicle Code, Map Code and Interaction Code line formats. Parser error: ";

#[derive(Clone, Debug, PartialEq)]
pub struct RetryPolicy {
    /// Retries after the first attempt for transient failures.
    pub max_retries: usize,
    /// Delay before the first retry; doubled for each further retry.
    pub base_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { max_retries: 3, base_delay: Duration::from_millis(500) }
    }
}

impl RetryPolicy {
    pub fn delay(&self, retry: usize) -> Duration {
        self.base_delay.saturating_mul(1u32.checked_shl(retry as u32).unwrap_or(u32::MAX))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncodeResult {
    pub bundle: CodeBundle,
    pub raw_reply: String,
    pub warnings: Vec<String>,
}

fn call_with_retries(
    provider: &dyn ChatProvider,
    messages: &[Message],
    policy: &RetryPolicy,
) -> Result<String, LlmError> {
    let mut attempt = 0;
    loop {
        attempt += 1;
        match provider.complete(messages) {
            Ok(reply) => return Ok(reply),
            Err(ProviderError::Transient(msg)) if attempt <= policy.max_retries => {
                let delay = policy.delay(attempt - 1);
                warn!("attempt {attempt} failed ({msg}); retrying in {delay:?}");
                thread::sleep(delay);
            }
            Err(source) => return Err(LlmError::Provider { attempts: attempt, source }),
        }
    }
}

fn parse(reply: &str, codec: &CodecConfig) -> Result<(CodeBundle, Vec<String>), String> {
    let parsed = parse_codes_with(reply, codec).map_err(|e| e.to_string())?;
    parsed.bundle.validate(codec).map_err(|e| e.to_string())?;
    Ok((parsed.bundle, parsed.warnings))
}

/// Asks the provider for codes matching `description`. A reply that fails to
/// parse gets one repair round; a second failure returns the raw reply.
pub fn encode_description(
    description: &str,
    provider: &dyn ChatProvider,
    policy: &RetryPolicy,
    codec: &CodecConfig,
) -> Result<EncodeResult, LlmError> {
    let mut messages = build_prompt(description)?;
    let reply = call_with_retries(provider, &messages, policy)?;
    debug!("model reply:\n{reply}");
    let error = match parse(&reply, codec) {
        Ok((bundle, warnings)) => return Ok(EncodeResult { bundle, raw_reply: reply, warnings }),
        Err(e) => e,
    };
    warn!("reply did not parse ({error}); requesting a repair");
    messages.push(Message::new(Role::Assistant, reply));
    messages.push(Message::new(Role::User, format!("{REPAIR_INSTRUCTION}{error}")));
    let repaired = call_with_retries(provider, &messages, policy)?;
    debug!("repaired reply:\n{repaired}");
    match parse(&repaired, codec) {
        Ok((bundle, mut warnings)) => {
            warnings.insert(0, format!("first reply rejected: {error}"));
            Ok(EncodeResult { bundle, raw_reply: repaired, warnings })
        }
        Err(message) => Err(LlmError::Parse { message, raw_reply: repaired }),
    }
}
