use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Core(#[from] trajgen_core::Error),
    #[error(transparent)]
    Nn(#[from] trajgen_nn::Error),
    #[error("invalid decoder config: {0}")]
    Config(String),
    #[error("corrupt checkpoint: {0}")]
    CorruptCheckpoint(String),
    #[error("unsupported checkpoint version {found} (expected {expected})")]
    CheckpointVersion { found: u32, expected: u32 },
    #[error("checkpoint config mismatch in field `{field}`: checkpoint has {found}, runtime expects {expected}")]
    ConfigMismatch { field: String, found: String, expected: String },
    #[error("training diverged: {0}")]
    NonFinite(String),
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;
