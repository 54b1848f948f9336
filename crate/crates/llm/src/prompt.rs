use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::LlmError;

/// System prompt describing the code format and the scene rules.
pub const PROMPT_TEMPLATE: &str = include_str!("../assets/prompt.txt");

/// Hex SHA-256 of [`PROMPT_TEMPLATE`].
pub const PINNED_PROMPT_SHA256: &str = "8fb701bcc1658cfa552c08919a9be79e63cfd7c3bfd6543b7c8e1e2bce2fe9f4";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub role: Role,
    pub content: String,
}

impl Message {
    pub fn new(role: Role, content: impl Into<String>) -> Self {
        Self { role, content: content.into() }
    }
}

pub fn prompt_sha256() -> String {
    Sha256::digest(PROMPT_TEMPLATE.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn build_prompt(description: &str) -> Result<Vec<Message>, LlmError> {
    if description.trim().is_empty() {
        return Err(LlmError::EmptyDescription);
    }
    Ok(vec![Message::new(Role::System, PROMPT_TEMPLATE), Message::new(Role::User, description)])
}
