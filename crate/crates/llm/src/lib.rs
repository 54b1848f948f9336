//! Language front-end: turns a free-text scene description into a
//! [`trajgen_core::CodeBundle`] by prompting a chat-completion model.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod encode;
mod error;
mod http;
mod mock;
mod prompt;

pub use encode::{encode_description, EncodeResult, RetryPolicy, REPAIR_INSTRUCTION};
pub use error::{LlmError, ProviderError};
pub use http::{redact, HttpProvider, ProviderConfig};
pub use mock::{MockProvider, FALLBACK_REPLY};
pub use prompt::{build_prompt, prompt_sha256, Message, Role, PINNED_PROMPT_SHA256, PROMPT_TEMPLATE};

/// A chat-completion backend.
pub trait ChatProvider: Send + Sync {
    fn complete(&self, messages: &[Message]) -> Result<String, ProviderError>;
}
