use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProviderError {
    /// Worth retrying: timeouts, connection failures, 429 and 5xx replies.
    #[error("transient provider failure: {0}")]
    Transient(String),
    #[error("provider failure: {0}")]
    Fatal(String),
}

#[derive(Debug, Error)]
pub enum LlmError {
    #[error("description is empty")]
    EmptyDescription,
    #[error("provider failed after {attempts} attempt(s): {source}")]
    Provider { attempts: usize, source: ProviderError },
    #[error("could not parse model reply: {message}")]
    Parse { message: String, raw_reply: String },
    #[error("provider configuration: {0}")]
    Config(String),
}
