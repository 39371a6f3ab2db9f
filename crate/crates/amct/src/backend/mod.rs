//! Uniform client for chat-completion endpoints.
//!
//! One [`ChatClient`] serves every model role in the pipeline (generation,
//! integration, reward, extractor, judge) through named profiles. A profile
//! is either live (OpenAI-compatible HTTP endpoint) or a deterministic
//! offline mock. Per-profile admission is gated by a counting limiter;
//! retryable failures are retried with capped exponential backoff.

pub mod http;
pub mod mock;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Duration;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use tokio::sync::Semaphore;

use crate::config::{PipelineConfig, ProfileMode};
pub use mock::{Matcher, MockRule, MockScript};

/// Role of one chat message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: Role,
    pub content: String,
}

impl ChatMessage {
    pub fn system(content: impl Into<String>) -> Self {
        Self { role: Role::System, content: content.into() }
    }

    pub fn user(content: impl Into<String>) -> Self {
        Self { role: Role::User, content: content.into() }
    }
}

pub const DEFAULT_MAX_OUTPUT_CHARS: usize = 16_384;

/// One completion request, routed to a named profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ChatRequest {
    pub profile_name: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub max_output_chars: usize,
    pub correlation_id: String,
}

impl ChatRequest {
    /// A single-user-message request with the default output cap.
    pub fn from_user_text(
        profile_name: impl Into<String>,
        text: impl Into<String>,
        temperature: f64,
        correlation_id: impl Into<String>,
    ) -> Self {
        Self {
            profile_name: profile_name.into(),
            messages: vec![ChatMessage::user(text)],
            temperature,
            max_output_chars: DEFAULT_MAX_OUTPUT_CHARS,
            correlation_id: correlation_id.into(),
        }
    }

    /// All message contents concatenated in order, no separators. This is
    /// the string mock matchers run over and the digest input.
    pub fn concatenated_contents(&self) -> String {
        self.messages.iter().map(|m| m.content.as_str()).collect()
    }

    fn check(&self) -> Result<(), String> {
        if self.messages.is_empty() {
            return Err("messages must be nonempty".into());
        }
        if self.messages.last().map(|m| m.role) != Some(Role::User) {
            return Err("last message must have role user".into());
        }
        if self.temperature.is_nan() || self.temperature < 0.0 {
            return Err(format!("temperature {} must be >= 0", self.temperature));
        }
        if self.max_output_chars == 0 {
            return Err("max_output_chars must be positive".into());
        }
        Ok(())
    }
}

/// Retry behavior for one profile: capped exponential backoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    pub backoff_base_ms: u64,
    pub backoff_cap_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { max_attempts: 3, backoff_base_ms: 200, backoff_cap_ms: 5_000 }
    }
}

impl RetryPolicy {
    /// Delay slept before retry number `retry` (1-based): the base doubled
    /// per retry, capped. Non-decreasing by construction.
    pub fn delay_for_retry(&self, retry: u32) -> Duration {
        let factor = 1u64.checked_shl(retry.saturating_sub(1)).unwrap_or(u64::MAX);
        let ms = self
            .backoff_base_ms
            .saturating_mul(factor)
            .min(self.backoff_cap_ms);
        Duration::from_millis(ms)
    }

    /// The full delay schedule: one entry per possible retry.
    pub fn delays(&self) -> impl Iterator<Item = Duration> + '_ {
        (1..self.max_attempts).map(|r| self.delay_for_retry(r))
    }
}

/// Connection details of one live profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BackendProfile {
    pub name: String,
    pub endpoint_url: String,
    /// Name of the environment variable holding the secret; the secret is
    /// never stored in the profile.
    pub auth_env_var: String,
    pub model_name: String,
    pub retry: RetryPolicy,
    pub timeout_ms: u64,
    pub concurrency_limit: usize,
}

/// Model text plus how many attempts the call took.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Completion {
    pub text: String,
    pub attempts: u32,
}

#[derive(Debug, Error)]
pub enum BackendError {
    #[error("unknown backend profile {0:?}")]
    UnknownProfile(String),
    #[error("invalid request ({correlation_id}): {message}")]
    InvalidRequest { correlation_id: String, message: String },
    #[error("auth error for profile {profile:?}: {message}")]
    Auth { profile: String, message: String },
    #[error("transport failure for profile {profile:?} after {attempts} attempt(s): {message}")]
    Transport { profile: String, attempts: u32, message: String },
    #[error("malformed response from profile {profile:?}: {message}")]
    Malformed { profile: String, message: String },
    #[error("mock script {path}: {message}")]
    Script { path: PathBuf, message: String },
}

/// Anything that can answer chat requests.
#[async_trait]
pub trait ChatBackend: Send + Sync {
    async fn complete(&self, request: &ChatRequest) -> Result<Completion, BackendError>;
}

/// Outcome of a single transport attempt, before retry policy is applied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CallFailure {
    /// Timeouts, connection failures, HTTP 429 and 5xx.
    Retryable(String),
    /// Rejected credential (HTTP 401/403).
    Auth(String),
    /// Endpoint answered but the payload does not conform.
    Malformed(String),
    /// Any other non-retryable endpoint failure.
    Fatal(String),
}

/// A single-attempt transport for one profile. Retry, backoff, and
/// admission control are layered on top by [`ChatClient`].
#[async_trait]
pub trait ProfileDriver: Send + Sync {
    async fn call(&self, request: &ChatRequest, auth: Option<&str>) -> Result<String, CallFailure>;
}

/// Source of secrets, keyed by environment-variable name.
pub trait SecretSource: Send + Sync {
    fn get(&self, var: &str) -> Option<String>;
}

/// Reads secrets from the process environment.
pub struct EnvSecrets;

impl SecretSource for EnvSecrets {
    fn get(&self, var: &str) -> Option<String> {
        std::env::var(var).ok()
    }
}

struct ProfileEntry {
    limiter: Arc<Semaphore>,
    retry: RetryPolicy,
    /// `Some` means the profile needs a resolved credential before any
    /// transport activity.
    auth_env_var: Option<String>,
    driver: Arc<dyn ProfileDriver>,
}

/// Routes requests to named profiles with admission control and retries.
/// Shareable across concurrent tasks; completion order is unspecified and
/// callers correlate results through the futures they hold.
pub struct ChatClient {
    profiles: BTreeMap<String, ProfileEntry>,
    secrets: Arc<dyn SecretSource>,
}

impl ChatClient {
    pub fn builder() -> ChatClientBuilder {
        ChatClientBuilder {
            profiles: BTreeMap::new(),
            secrets: Arc::new(EnvSecrets),
        }
    }

    /// Build every profile named in the config: mock profiles load their
    /// script (or an empty one inheriting the pipeline seed), live profiles
    /// get an HTTP driver.
    pub fn from_config(cfg: &PipelineConfig) -> Result<Self, BackendError> {
        let mut builder = Self::builder();
        for (name, profile) in &cfg.backends {
            match profile.mode {
                ProfileMode::Mock => {
                    let script = match &profile.mock_script {
                        Some(path) => MockScript::load(path)?,
                        None => MockScript::empty(cfg.seed),
                    };
                    builder = builder.mock_profile_with(
                        name,
                        script,
                        profile.retry,
                        profile.concurrency_limit,
                    );
                }
                ProfileMode::Live => {
                    let driver = http::HttpDriver::new(
                        profile.endpoint_url.clone().unwrap_or_default(),
                        profile.model_name.clone().unwrap_or_default(),
                        Duration::from_millis(profile.timeout_ms),
                    );
                    builder = builder.live_profile(
                        name,
                        Arc::new(driver),
                        profile.auth_env_var.clone().unwrap_or_default(),
                        profile.retry,
                        profile.concurrency_limit,
                    );
                }
            }
        }
        Ok(builder.build())
    }

    /// One shared mock script behind several profile names. Handy for
    /// offline runs and tests.
    pub fn single_script_mock(script: MockScript, profile_names: &[&str]) -> Self {
        let mut builder = Self::builder();
        for name in profile_names {
            builder = builder.mock_profile(name, script.clone());
        }
        builder.build()
    }
}

pub struct ChatClientBuilder {
    profiles: BTreeMap<String, ProfileEntry>,
    secrets: Arc<dyn SecretSource>,
}

impl ChatClientBuilder {
    pub fn secrets(mut self, secrets: Arc<dyn SecretSource>) -> Self {
        self.secrets = secrets;
        self
    }

    pub fn mock_profile(self, name: &str, script: MockScript) -> Self {
        self.mock_profile_with(name, script, RetryPolicy::default(), 8)
    }

    pub fn mock_profile_with(
        mut self,
        name: &str,
        script: MockScript,
        retry: RetryPolicy,
        concurrency_limit: usize,
    ) -> Self {
        self.profiles.insert(
            name.to_string(),
            ProfileEntry {
                limiter: Arc::new(Semaphore::new(concurrency_limit.max(1))),
                retry,
                auth_env_var: None,
                driver: Arc::new(script),
            },
        );
        self
    }

    pub fn live_profile(
        mut self,
        name: &str,
        driver: Arc<dyn ProfileDriver>,
        auth_env_var: String,
        retry: RetryPolicy,
        concurrency_limit: usize,
    ) -> Self {
        self.profiles.insert(
            name.to_string(),
            ProfileEntry {
                limiter: Arc::new(Semaphore::new(concurrency_limit.max(1))),
                retry,
                auth_env_var: Some(auth_env_var),
                driver,
            },
        );
        self
    }

    /// A driver without auth requirements, still behind retry and the
    /// limiter. Used by instrumented test doubles.
    pub fn driver_profile(
        mut self,
        name: &str,
        driver: Arc<dyn ProfileDriver>,
        retry: RetryPolicy,
        concurrency_limit: usize,
    ) -> Self {
        self.profiles.insert(
            name.to_string(),
            ProfileEntry {
                limiter: Arc::new(Semaphore::new(concurrency_limit.max(1))),
                retry,
                auth_env_var: None,
                driver,
            },
        );
        self
    }

    pub fn build(self) -> ChatClient {
        ChatClient { profiles: self.profiles, secrets: self.secrets }
    }
}

/// Truncate to at most `max_chars` characters, on a char boundary.
fn truncate_chars(text: String, max_chars: usize) -> String {
    match text.char_indices().nth(max_chars) {
        Some((byte_idx, _)) => text[..byte_idx].to_string(),
        None => text,
    }
}

#[async_trait]
impl ChatBackend for ChatClient {
    async fn complete(&self, request: &ChatRequest) -> Result<Completion, BackendError> {
        let entry = self
            .profiles
            .get(&request.profile_name)
            .ok_or_else(|| BackendError::UnknownProfile(request.profile_name.clone()))?;
        request.check().map_err(|message| BackendError::InvalidRequest {
            correlation_id: request.correlation_id.clone(),
            message,
        })?;

        // Credential resolution happens before any transport activity.
        let auth = match &entry.auth_env_var {
            Some(var) => Some(self.secrets.get(var).ok_or_else(|| BackendError::Auth {
                profile: request.profile_name.clone(),
                message: format!("environment variable {var} is not set"),
            })?),
            None => None,
        };

        let _permit = entry
            .limiter
            .clone()
            .acquire_owned()
            .await
            .expect("limiter is never closed");

        let mut attempt: u32 = 0;
        loop {
            attempt += 1;
            match entry.driver.call(request, auth.as_deref()).await {
                Ok(text) => {
                    return Ok(Completion {
                        text: truncate_chars(text, request.max_output_chars),
                        attempts: attempt,
                    });
                }
                Err(CallFailure::Retryable(message)) => {
                    if attempt >= entry.retry.max_attempts {
                        return Err(BackendError::Transport {
                            profile: request.profile_name.clone(),
                            attempts: attempt,
                            message,
                        });
                    }
                    tokio::time::sleep(entry.retry.delay_for_retry(attempt)).await;
                }
                Err(CallFailure::Auth(message)) => {
                    return Err(BackendError::Auth {
                        profile: request.profile_name.clone(),
                        message,
                    });
                }
                Err(CallFailure::Malformed(message)) => {
                    return Err(BackendError::Malformed {
                        profile: request.profile_name.clone(),
                        message,
                    });
                }
                Err(CallFailure::Fatal(message)) => {
                    return Err(BackendError::Transport {
                        profile: request.profile_name.clone(),
                        attempts: attempt,
                        message,
                    });
                }
            }
        }
    }
}
