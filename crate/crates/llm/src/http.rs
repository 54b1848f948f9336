use std::time::Duration;

use log::debug;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::{ChatProvider, LlmError, Message, ProviderError, RetryPolicy};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderConfig {
    /// Chat-completions URL accepting `{model, messages, temperature}`.
    pub endpoint: String,
    pub model: String,
    /// Environment variable holding the bearer token.
    pub token_env: String,
    pub timeout_seconds: f64,
    pub max_retries: usize,
    pub retry_base_ms: u64,
    pub temperature: f64,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        Self {
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model: "gpt-4".into(),
            token_env: "TRAJGEN_LLM_TOKEN".into(),
            timeout_seconds: 60.0,
            max_retries: 3,
            retry_base_ms: 500,
            temperature: 0.0,
        }
    }
}

impl ProviderConfig {
    pub fn validate(&self) -> Result<(), LlmError> {
        if !(self.timeout_seconds > 0.0 && self.timeout_seconds.is_finite()) {
            return Err(LlmError::Config(format!("timeout_seconds must be positive, got {}", self.timeout_seconds)));
        }
        if self.endpoint.is_empty() || self.model.is_empty() {
            return Err(LlmError::Config("endpoint and model must be set".into()));
        }
        Ok(())
    }

    pub fn retry_policy(&self) -> RetryPolicy {
        RetryPolicy { max_retries: self.max_retries, base_delay: Duration::from_millis(self.retry_base_ms) }
    }
}

/// Replaces every occurrence of `secret` in `text`.
pub fn redact(text: &str, secret: &str) -> String {
    if secret.is_empty() {
        text.to_string()
    } else {
        text.replace(secret, "[REDACTED]")
    }
}

pub struct HttpProvider {
    config: ProviderConfig,
    token: String,
    client: reqwest::blocking::Client,
}

impl HttpProvider {
    /// Reads the token from the configured environment variable.
    pub fn from_env(config: ProviderConfig) -> Result<Self, LlmError> {
        let token = std::env::var(&config.token_env)
            .map_err(|_| LlmError::Config(format!("environment variable {} is not set", config.token_env)))?;
        Self::new(config, token)
    }

    pub fn new(config: ProviderConfig, token: String) -> Result<Self, LlmError> {
        config.validate()?;
        let client = reqwest::blocking::Client::builder()
            .timeout(Duration::from_secs_f64(config.timeout_seconds))
            .build()
            .map_err(|e| LlmError::Config(e.to_string()))?;
        Ok(Self { config, token, client })
    }

    pub fn config(&self) -> &ProviderConfig {
        &self.config
    }
}

impl ChatProvider for HttpProvider {
    fn complete(&self, messages: &[Message]) -> Result<String, ProviderError> {
        let body = json!({
            "model": self.config.model,
            "messages": messages,
            "temperature": self.config.temperature,
        });
        debug!(
            "POST {} authorization=Bearer [REDACTED] body={}",
            self.config.endpoint,
            redact(&body.to_string(), &self.token)
        );
        let response = self
            .client
            .post(&self.config.endpoint)
            .bearer_auth(&self.token)
            .json(&body)
            .send()
            .map_err(|e| ProviderError::Transient(redact(&e.to_string(), &self.token)))?;
        let status = response.status();
        let text = response.text().map_err(|e| ProviderError::Transient(e.to_string()))?;
        debug!("response {status}: {}", redact(&text, &self.token));
        if status.as_u16() == 429 || status.is_server_error() {
            return Err(ProviderError::Transient(format!("HTTP {status}")));
        }
        if !status.is_success() {
            return Err(ProviderError::Fatal(format!("HTTP {status}: {}", redact(&text, &self.token))));
        }
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| ProviderError::Fatal(format!("malformed response: {e}")))?;
        value["choices"][0]["message"]["content"]
            .as_str()
            .map(str::to_string)
            .ok_or_else(|| ProviderError::Fatal("response has no choices[0].message.content".into()))
    }
}
