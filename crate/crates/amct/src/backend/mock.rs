//! Deterministic offline mock backend.
//!
//! A mock script is an ordered rule list; the first rule whose matcher
//! hits the concatenated message contents wins, and its template is
//! returned with `{digest}` substituted. Unmatched requests fall through to
//! the fallback template. Responses are a pure function of (seed, request
//! contents), so a pipeline re-run against the same script and config
//! yields byte-identical artifacts.

use std::path::Path;

use async_trait::async_trait;
use serde::{Deserialize, Serialize};

use crate::digest::{hex16, request_digest};

use super::{BackendError, CallFailure, ChatRequest, ProfileDriver};

/// How a rule decides whether it applies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Matcher {
    /// The concatenated message contents equal this string.
    Exact(String),
    /// The concatenated message contents contain this string.
    Substring(String),
}

impl Matcher {
    pub fn matches(&self, contents: &str) -> bool {
        match self {
            Matcher::Exact(s) => contents == s,
            Matcher::Substring(s) => contents.contains(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockRule {
    pub matcher: Matcher,
    pub response_template: String,
}

/// A scripted offline backend, loadable from a JSON or TOML file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MockScript {
    pub seed: u64,
    #[serde(default)]
    pub rules: Vec<MockRule>,
    pub fallback_template: String,
}

impl MockScript {
    /// No rules; every request resolves to its digest.
    pub fn empty(seed: u64) -> Self {
        Self { seed, rules: Vec::new(), fallback_template: "{digest}".into() }
    }

    pub fn load(path: &Path) -> Result<Self, BackendError> {
        let text = std::fs::read_to_string(path).map_err(|e| BackendError::Script {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let script = match path.extension().and_then(|e| e.to_str()) {
            Some("toml") => toml::from_str(&text).map_err(|e| BackendError::Script {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?,
            _ => serde_json::from_str(&text).map_err(|e| BackendError::Script {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?,
        };
        Ok(script)
    }

    /// The response for a request: first matching rule's template, else the
    /// fallback, with `{digest}` substituted.
    pub fn respond(&self, request: &ChatRequest) -> String {
        let contents = request.concatenated_contents();
        let template = self
            .rules
            .iter()
            .find(|r| r.matcher.matches(&contents))
            .map(|r| r.response_template.as_str())
            .unwrap_or(&self.fallback_template);
        if template.contains("{digest}") {
            let digest = hex16(request_digest(self.seed, request.messages.iter().map(|m| &m.content)));
            template.replace("{digest}", &digest)
        } else {
            template.to_string()
        }
    }
}

#[async_trait]
impl ProfileDriver for MockScript {
    async fn call(&self, request: &ChatRequest, _auth: Option<&str>) -> Result<String, CallFailure> {
        Ok(self.respond(request))
    }
}
