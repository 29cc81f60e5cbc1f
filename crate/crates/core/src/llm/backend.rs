//! Chat backends: the trait, configuration, and the HTTP implementation.

use std::time::Duration;

use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

/// Environment variable holding the credential for the live backend.
pub const API_KEY_ENV: &str = "CODS_API_KEY";

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("backend unavailable: {0}")]
    Unavailable(String),
    #[error("no credential: set {0}")]
    MissingCredential(&'static str),
    #[error("backend returned HTTP {status}: {body}")]
    Http { status: u16, body: String },
    #[error("unexpected backend response: {0}")]
    Protocol(String),
}

/// One completion per call. Implementations must tolerate concurrent calls.
pub trait ChatBackend: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, BackendError>;
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("invalid configuration: {0}")]
    Parse(#[from] toml::de::Error),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlmConfig {
    pub endpoint: String,
    pub model: String,
    pub temperature: f64,
    pub max_retries: u32,
    pub timeout_secs: u64,
}

impl Default for LlmConfig {
    fn default() -> Self {
        Self {
            endpoint: "https://api.openai.com/v1/chat/completions".to_owned(),
            model: "gpt-4".to_owned(),
            temperature: 0.0,
            max_retries: 1,
            timeout_secs: 120,
        }
    }
}

#[derive(Deserialize)]
struct ConfigFile {
    #[serde(default)]
    llm: LlmConfig,
}

impl LlmConfig {
    /// Reads the `[llm]` table of a TOML document; other tables are ignored.
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let file: ConfigFile = toml::from_str(text)?;
        Ok(file.llm)
    }
}

/// Chat-completions over HTTP: POSTs `{"model", "temperature", "messages"}`
/// and returns `choices[0].message.content`.
pub struct LiveBackend {
    agent: ureq::Agent,
    config: LlmConfig,
    api_key: String,
}

impl LiveBackend {
    pub fn new(config: LlmConfig, api_key: impl Into<String>) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Self {
            agent,
            config,
            api_key: api_key.into(),
        }
    }

    /// Takes the credential from [`API_KEY_ENV`].
    pub fn from_env(config: LlmConfig) -> Result<Self, BackendError> {
        match std::env::var(API_KEY_ENV) {
            Ok(key) if !key.trim().is_empty() => Ok(Self::new(config, key.trim())),
            _ => Err(BackendError::MissingCredential(API_KEY_ENV)),
        }
    }

    pub fn config(&self) -> &LlmConfig {
        &self.config
    }
}

impl ChatBackend for LiveBackend {
    fn complete(&self, prompt: &str) -> Result<String, BackendError> {
        let body = json!({
            "model": self.config.model,
            "temperature": self.config.temperature,
            "messages": [{"role": "user", "content": prompt}],
        });
        let mut response = self
            .agent
            .post(&self.config.endpoint)
            .header("Authorization", format!("Bearer {}", self.api_key))
            .send_json(&body)
            .map_err(|e| BackendError::Unavailable(e.to_string()))?;
        let status = response.status().as_u16();
        let text = response
            .body_mut()
            .read_to_string()
            .map_err(|e| BackendError::Unavailable(e.to_string()))?;
        if !(200..300).contains(&status) {
            return Err(BackendError::Http { status, body: text });
        }
        let v: Value = serde_json::from_str(&text).map_err(|e| BackendError::Protocol(e.to_string()))?;
        v.pointer("/choices/0/message/content")
            .and_then(Value::as_str)
            .map(str::to_owned)
            .ok_or_else(|| BackendError::Protocol("missing choices[0].message.content".to_owned()))
    }
}
