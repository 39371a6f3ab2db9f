//! Pipeline configuration: the auxiliary language set, score threshold and
//! filter switch, pathway tie-break order, marker registry, backend
//! profiles, and instruction template overrides.
//!
//! A config file is TOML or JSON mapping 1:1 onto [`PipelineConfig`];
//! unknown keys are rejected by the parser. [`validate_config`] is pure and
//! returns violations as data, each naming the offending field.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::RetryPolicy;
use crate::template::Templates;
use crate::types::{LanguageTag, Pathway};

/// Conventional profile names used by the pipeline stages.
pub mod profile_names {
    pub const GENERATION: &str = "generation";
    pub const INTEGRATION: &str = "integration";
    pub const REWARD: &str = "reward";
    pub const EXTRACTOR: &str = "extractor";
    pub const JUDGE: &str = "judge";
}

/// Reasoning/answer marker literals for one language.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarkerPair {
    pub reasoning: String,
    pub answer: String,
}

/// Per-language marker literals plus a required default entry.
///
/// The default entry may contain the `{lang}` placeholder, substituted with
/// the looked-up language code; lookups for unregistered languages always
/// resolve to the substituted default and never fail.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarkerRegistry {
    pub default: MarkerPair,
    pub per_language: BTreeMap<LanguageTag, MarkerPair>,
}

impl Default for MarkerRegistry {
    fn default() -> Self {
        Self {
            default: MarkerPair {
                reasoning: "<reason:{lang}>".into(),
                answer: "<answer>".into(),
            },
            per_language: BTreeMap::new(),
        }
    }
}

impl MarkerRegistry {
    /// Markers for `lang`: the registered pair, or the default entry with
    /// `{lang}` substituted.
    pub fn markers_for(&self, lang: &LanguageTag) -> MarkerPair {
        match self.per_language.get(lang) {
            Some(pair) => pair.clone(),
            None => MarkerPair {
                reasoning: self.default.reasoning.replace("{lang}", lang.as_str()),
                answer: self.default.answer.replace("{lang}", lang.as_str()),
            },
        }
    }

    /// Every answer-marker literal that could appear in output for the
    /// given languages (used when stripping reasoning from raw text).
    pub fn answer_markers_for(&self, langs: impl IntoIterator<Item = LanguageTag>) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for lang in langs {
            let m = self.markers_for(&lang).answer;
            if !out.contains(&m) {
                out.push(m);
            }
        }
        out
    }
}

/// Whether a backend profile talks to a live endpoint or the offline mock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileMode {
    Mock,
    Live,
}

/// Configuration of one named backend profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub mode: ProfileMode,
    /// Mock mode: path to the mock script, relative to the config file.
    /// Absent means an empty script (every request hits the fallback).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mock_script: Option<PathBuf>,
    /// Live mode: absolute chat-completions endpoint URL.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub endpoint_url: Option<String>,
    /// Live mode: name of the environment variable holding the secret.
    /// The secret itself is never stored in config.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub auth_env_var: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model_name: Option<String>,
    /// Sampling temperature; when absent, generation/integration default to
    /// 0.7 and scoring/extraction/judging to 0.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default = "default_timeout_ms")]
    pub timeout_ms: u64,
    #[serde(default = "default_concurrency_limit")]
    pub concurrency_limit: usize,
    #[serde(default)]
    pub retry: RetryPolicy,
}

fn default_timeout_ms() -> u64 {
    30_000
}

fn default_concurrency_limit() -> usize {
    8
}

impl ProfileConfig {
    pub fn mock() -> Self {
        Self {
            mode: ProfileMode::Mock,
            mock_script: None,
            endpoint_url: None,
            auth_env_var: None,
            model_name: None,
            temperature: None,
            timeout_ms: default_timeout_ms(),
            concurrency_limit: default_concurrency_limit(),
            retry: RetryPolicy::default(),
        }
    }
}

/// Everything a pipeline run needs, shared by all stages.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    /// Auxiliary language set, in priority order.
    pub theta: Vec<LanguageTag>,
    /// Inclusive reward-score threshold for the quality filter.
    #[serde(default = "default_score_threshold")]
    pub score_threshold: f64,
    #[serde(default = "default_filter_enabled")]
    pub filter_enabled: bool,
    /// Tie-break priority among pathways (earlier wins). Empty means the
    /// derived default: Direct first, then ThinkIn per theta order.
    #[serde(default)]
    pub pathway_tiebreak_order: Vec<Pathway>,
    #[serde(default)]
    pub marker_registry: MarkerRegistry,
    /// Ablation mode: produce only this pathway.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forced_pathway: Option<Pathway>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_max_parallel_requests")]
    pub max_parallel_requests: usize,
    /// Whether the reasoning-phase marker contributes to the training
    /// signal. Reasoning, answer marker, and response are always supervised.
    #[serde(default = "default_supervise_q_marker")]
    pub supervise_q_marker: bool,
    #[serde(default)]
    pub templates: Templates,
    #[serde(default)]
    pub backends: BTreeMap<String, ProfileConfig>,
}

fn default_score_threshold() -> f64 {
    9.0
}

fn default_filter_enabled() -> bool {
    true
}

fn default_max_parallel_requests() -> usize {
    4
}

fn default_supervise_q_marker() -> bool {
    true
}

impl PipelineConfig {
    /// A config with the given auxiliary languages and defaults everywhere
    /// else; the tie-break order is derived from theta.
    pub fn new(theta: Vec<LanguageTag>) -> Self {
        let mut cfg = Self {
            theta,
            score_threshold: default_score_threshold(),
            filter_enabled: default_filter_enabled(),
            pathway_tiebreak_order: Vec::new(),
            marker_registry: MarkerRegistry::default(),
            forced_pathway: None,
            seed: 0,
            max_parallel_requests: default_max_parallel_requests(),
            supervise_q_marker: default_supervise_q_marker(),
            templates: Templates::default(),
            backends: BTreeMap::new(),
        };
        cfg.fill_derived_defaults();
        cfg
    }

    /// Fill fields whose defaults depend on other fields. Called after
    /// deserialization; a present-but-empty tie-break order is replaced by
    /// the derived one.
    pub fn fill_derived_defaults(&mut self) {
        if self.pathway_tiebreak_order.is_empty() {
            self.pathway_tiebreak_order = std::iter::once(Pathway::Direct)
                .chain(self.theta.iter().cloned().map(Pathway::ThinkIn))
                .collect();
        }
    }

    /// Tie-break rank of a pathway: earlier in the order wins. Pathways
    /// outside the configured order sort last.
    pub fn tiebreak_rank(&self, pathway: &Pathway) -> usize {
        self.pathway_tiebreak_order
            .iter()
            .position(|p| p == pathway)
            .unwrap_or(usize::MAX)
    }

    /// Effective sampling temperature for a profile: the profile's own
    /// setting, else 0.7 for generation/integration and 0 for the rest.
    pub fn temperature_for(&self, profile_name: &str) -> f64 {
        if let Some(p) = self.backends.get(profile_name) {
            if let Some(t) = p.temperature {
                return t;
            }
        }
        match profile_name {
            profile_names::GENERATION | profile_names::INTEGRATION => 0.7,
            _ => 0.0,
        }
    }

    /// Load from a TOML or JSON file. Relative mock-script paths are
    /// resolved against the config file's directory.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut cfg: PipelineConfig = match path.extension().and_then(|e| e.to_str()) {
            Some("json") => serde_json::from_str(&text).map_err(|e| ConfigError::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?,
            _ => toml::from_str(&text).map_err(|e| ConfigError::Parse {
                path: path.to_path_buf(),
                message: e.to_string(),
            })?,
        };
        cfg.fill_derived_defaults();
        if let Some(dir) = path.parent() {
            for profile in cfg.backends.values_mut() {
                if let Some(script) = &profile.mock_script {
                    if script.is_relative() {
                        profile.mock_script = Some(dir.join(script));
                    }
                }
            }
        }
        Ok(cfg)
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("failed to read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to parse config {path}: {message}")]
    Parse { path: PathBuf, message: String },
}

/// One invariant violation, naming the field it concerns.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigViolation {
    pub field: String,
    pub message: String,
}

impl std::fmt::Display for ConfigViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn violation(field: impl Into<String>, message: impl Into<String>) -> ConfigViolation {
    ConfigViolation { field: field.into(), message: message.into() }
}

/// Check every config invariant. Pure: the same input always yields the
/// same violation list, and an empty list means the config is usable.
pub fn validate_config(cfg: &PipelineConfig) -> Vec<ConfigViolation> {
    let mut out = Vec::new();

    if cfg.theta.is_empty() {
        out.push(violation("theta", "auxiliary language set must be nonempty"));
    }
    for (i, lang) in cfg.theta.iter().enumerate() {
        if cfg.theta[..i].contains(lang) {
            out.push(violation("theta", format!("duplicate language {lang:?}")));
        }
    }

    if !(0.0..=10.0).contains(&cfg.score_threshold) {
        out.push(violation(
            "score_threshold",
            format!("{} is outside [0, 10]", cfg.score_threshold),
        ));
    }

    let expected: Vec<Pathway> = std::iter::once(Pathway::Direct)
        .chain(cfg.theta.iter().cloned().map(Pathway::ThinkIn))
        .collect();
    for p in &expected {
        match cfg.pathway_tiebreak_order.iter().filter(|q| *q == p).count() {
            1 => {}
            0 => out.push(violation(
                "pathway_tiebreak_order",
                format!("missing pathway {p}"),
            )),
            n => out.push(violation(
                "pathway_tiebreak_order",
                format!("pathway {p} appears {n} times"),
            )),
        }
    }
    for p in &cfg.pathway_tiebreak_order {
        if !expected.contains(p) {
            out.push(violation(
                "pathway_tiebreak_order",
                format!("pathway {p} is not Direct or ThinkIn of a theta language"),
            ));
        }
    }

    if cfg.marker_registry.default.reasoning.is_empty()
        || cfg.marker_registry.default.answer.is_empty()
    {
        out.push(violation("marker_registry.default", "markers must be nonempty"));
    }
    let mut marker_langs: Vec<LanguageTag> = cfg.theta.clone();
    marker_langs.extend(cfg.marker_registry.per_language.keys().cloned());
    marker_langs.sort();
    marker_langs.dedup();
    for lang in &marker_langs {
        let pair = cfg.marker_registry.markers_for(lang);
        let field = format!("marker_registry.{lang}");
        if pair.reasoning.is_empty() || pair.answer.is_empty() {
            out.push(violation(field.clone(), "markers must be nonempty"));
        } else if pair.reasoning == pair.answer {
            out.push(violation(
                field,
                format!("reasoning and answer markers are both {:?}", pair.reasoning),
            ));
        }
    }

    if cfg.max_parallel_requests == 0 {
        out.push(violation("max_parallel_requests", "must be at least 1"));
    }

    for (name, profile) in &cfg.backends {
        let field = |suffix: &str| format!("backends.{name}.{suffix}");
        if profile.retry.max_attempts == 0 {
            out.push(violation(field("retry.max_attempts"), "must be at least 1"));
        }
        if profile.concurrency_limit == 0 {
            out.push(violation(field("concurrency_limit"), "must be at least 1"));
        }
        if profile.mode == ProfileMode::Live {
            match profile.endpoint_url.as_deref() {
                None | Some("") => {
                    out.push(violation(field("endpoint_url"), "required for live profiles"));
                }
                Some(url) => match reqwest::Url::parse(url) {
                    Ok(parsed) if parsed.scheme() == "http" || parsed.scheme() == "https" => {}
                    _ => out.push(violation(
                        field("endpoint_url"),
                        format!("{url:?} is not an absolute http(s) URL"),
                    )),
                },
            }
            if profile.auth_env_var.as_deref().is_none_or(str::is_empty) {
                out.push(violation(field("auth_env_var"), "required for live profiles"));
            }
            if profile.model_name.as_deref().is_none_or(str::is_empty) {
                out.push(violation(field("model_name"), "required for live profiles"));
            }
        }
    }

    out
}
