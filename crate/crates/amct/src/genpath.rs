//! Candidate pool generation: one direct response plus one cross-lingual
//! chain-of-thought response per auxiliary language.
//!
//! The cross-lingual route is rephrase -> intermediate reasoning in the
//! auxiliary language -> integration back into the prompt language. The
//! auxiliary language equal to the prompt's own language is skipped as
//! redundant with the direct route, so an English prompt under
//! theta = [en, zh, id] yields three candidates, a Malay prompt four.

use futures::stream::{self, StreamExt};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{BackendError, ChatBackend, ChatRequest};
use crate::config::{profile_names, validate_config, ConfigViolation, PipelineConfig};
use crate::template::{render, TemplateError};
use crate::types::{LanguageTag, Pathway, Prompt};

/// Reasoning produced in an auxiliary language, together with the restated
/// prompt that elicited it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntermediateReasoning {
    pub text: String,
    pub language: LanguageTag,
    pub rephrased_prompt: String,
}

/// One candidate final response. `reasoning` is present exactly when the
/// pathway is not direct, and the final text is always in the prompt's
/// language.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateResponse {
    pub prompt_id: String,
    pub pathway: Pathway,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoning: Option<IntermediateReasoning>,
    pub final_text: String,
    pub final_language: LanguageTag,
}

/// A pathway that could not produce a candidate, with the rendered error.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateFailure {
    pub prompt_id: String,
    pub pathway: Pathway,
    pub error: String,
}

/// All candidates for one prompt, in deterministic pathway order, plus
/// per-pathway failures. successes + failures always cover the planned
/// pathway set.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidatePool {
    pub prompt_id: String,
    pub candidates: Vec<CandidateResponse>,
    pub failures: Vec<CandidateFailure>,
}

#[derive(Debug, Error)]
pub enum GenError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error("{stage} produced no non-whitespace output")]
    EmptyGeneration { stage: &'static str },
    #[error("rephrase target equals the prompt language {0}")]
    RephraseIntoSameLanguage(LanguageTag),
    #[error("config is invalid: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    InvalidConfig(Vec<ConfigViolation>),
    #[error("all pathways failed for prompt {prompt_id}")]
    AllPathwaysFailed { prompt_id: String },
}

fn require_nonempty(text: String, stage: &'static str) -> Result<String, GenError> {
    if text.trim().is_empty() {
        Err(GenError::EmptyGeneration { stage })
    } else {
        Ok(text)
    }
}

impl Prompt {
    /// Prompt text as sent to models: the question plus a labeled choice
    /// block when present.
    pub fn body_text(&self) -> String {
        match self.choices.as_deref() {
            None | Some([]) => self.text.clone(),
            Some(choices) => {
                let mut out = self.text.clone();
                for c in choices {
                    out.push('\n');
                    out.push_str(&c.label);
                    out.push_str(": ");
                    out.push_str(&c.text);
                }
                out
            }
        }
    }
}

/// Runs the candidate-generation operations against a backend.
pub struct PathwayGenerator<'a> {
    cfg: &'a PipelineConfig,
    backend: &'a dyn ChatBackend,
}

impl<'a> PathwayGenerator<'a> {
    pub fn new(cfg: &'a PipelineConfig, backend: &'a dyn ChatBackend) -> Self {
        Self { cfg, backend }
    }

    async fn generation_call(
        &self,
        text: String,
        correlation_id: String,
    ) -> Result<String, GenError> {
        let request = ChatRequest::from_user_text(
            profile_names::GENERATION,
            text,
            self.cfg.temperature_for(profile_names::GENERATION),
            correlation_id,
        );
        Ok(self.backend.complete(&request).await?.text)
    }

    /// Restate the prompt in the target language via the generation model.
    pub async fn rephrase_prompt(
        &self,
        prompt: &Prompt,
        target: &LanguageTag,
    ) -> Result<String, GenError> {
        if target == &prompt.language {
            return Err(GenError::RephraseIntoSameLanguage(target.clone()));
        }
        let body = render(
            "rephrase",
            &self.cfg.templates.rephrase,
            &["prompt", "target_language"],
            &[
                ("prompt", &prompt.body_text()),
                ("target_language", target.display_name()),
            ],
        )?;
        let reply = self
            .generation_call(body, format!("{}/think:{target}/rephrase", prompt.id))
            .await?;
        require_nonempty(reply, "rephrase")
    }

    /// Produce intermediate reasoning in language `t` for a restated prompt.
    pub async fn generate_intermediate(
        &self,
        rephrased: &str,
        t: &LanguageTag,
        correlation_id: &str,
    ) -> Result<IntermediateReasoning, GenError> {
        let body = render(
            "reason",
            &self.cfg.templates.reason,
            &["prompt", "language"],
            &[("prompt", rephrased), ("language", t.display_name())],
        )?;
        let reply = self
            .generation_call(body, format!("{correlation_id}/reason"))
            .await?;
        Ok(IntermediateReasoning {
            text: require_nonempty(reply, "reasoning")?,
            language: t.clone(),
            rephrased_prompt: rephrased.to_string(),
        })
    }

    /// Rewrite intermediate reasoning as the final answer in the prompt's
    /// language. Reasoning already in the target language is still routed
    /// through integration; there is no bypass.
    pub async fn integrate(
        &self,
        prompt: &Prompt,
        reasoning: &IntermediateReasoning,
    ) -> Result<String, GenError> {
        let body = render(
            "integrate",
            &self.cfg.templates.integrate,
            &["prompt", "reasoning", "language"],
            &[
                ("prompt", &prompt.body_text()),
                ("reasoning", &reasoning.text),
                ("language", prompt.language.display_name()),
            ],
        )?;
        let request = ChatRequest::from_user_text(
            profile_names::INTEGRATION,
            body,
            self.cfg.temperature_for(profile_names::INTEGRATION),
            format!("{}/think:{}/integrate", prompt.id, reasoning.language),
        );
        let reply = self.backend.complete(&request).await?.text;
        require_nonempty(reply, "integration")
    }

    /// Answer directly in the prompt's language, no intermediate step.
    pub async fn generate_direct(&self, prompt: &Prompt) -> Result<CandidateResponse, GenError> {
        let body = render(
            "direct",
            &self.cfg.templates.direct,
            &["prompt", "language"],
            &[
                ("prompt", &prompt.body_text()),
                ("language", prompt.language.display_name()),
            ],
        )?;
        let reply = self
            .generation_call(body, format!("{}/direct", prompt.id))
            .await?;
        Ok(CandidateResponse {
            prompt_id: prompt.id.clone(),
            pathway: Pathway::Direct,
            reasoning: None,
            final_text: require_nonempty(reply, "direct generation")?,
            final_language: prompt.language.clone(),
        })
    }

    /// The full cross-lingual route through auxiliary language `t`. When
    /// `t` equals the prompt language (reachable only via forced_pathway),
    /// rephrasing is the identity and the prompt text is used as-is.
    pub async fn generate_cot(
        &self,
        prompt: &Prompt,
        t: &LanguageTag,
    ) -> Result<CandidateResponse, GenError> {
        let rephrased = if t == &prompt.language {
            prompt.body_text()
        } else {
            self.rephrase_prompt(prompt, t).await?
        };
        let correlation = format!("{}/think:{t}", prompt.id);
        let reasoning = self
            .generate_intermediate(&rephrased, t, &correlation)
            .await?;
        let final_text = self.integrate(prompt, &reasoning).await?;
        Ok(CandidateResponse {
            prompt_id: prompt.id.clone(),
            pathway: Pathway::ThinkIn(t.clone()),
            reasoning: Some(reasoning),
            final_text,
            final_language: prompt.language.clone(),
        })
    }

    /// The pathway set for one prompt, a deterministic function of config:
    /// the forced pathway alone, or Direct followed by ThinkIn per theta
    /// order with the prompt's own language skipped.
    pub fn planned_pathways(&self, prompt: &Prompt) -> Vec<Pathway> {
        if let Some(forced) = &self.cfg.forced_pathway {
            return vec![forced.clone()];
        }
        std::iter::once(Pathway::Direct)
            .chain(
                self.cfg
                    .theta
                    .iter()
                    .filter(|t| **t != prompt.language)
                    .cloned()
                    .map(Pathway::ThinkIn),
            )
            .collect()
    }

    /// Generate the candidate pool for one prompt. Pathways run
    /// concurrently and are reassembled in planned order; the operation
    /// fails only when every pathway fails.
    pub async fn generate_candidates(&self, prompt: &Prompt) -> Result<CandidatePool, GenError> {
        let violations = validate_config(self.cfg);
        if !violations.is_empty() {
            return Err(GenError::InvalidConfig(violations));
        }

        let pathways = self.planned_pathways(prompt);
        let outcomes = futures::future::join_all(pathways.iter().map(|p| async move {
            match p {
                Pathway::Direct => self.generate_direct(prompt).await,
                Pathway::ThinkIn(t) => self.generate_cot(prompt, t).await,
            }
        }))
        .await;

        let mut pool = CandidatePool {
            prompt_id: prompt.id.clone(),
            candidates: Vec::new(),
            failures: Vec::new(),
        };
        for (pathway, outcome) in pathways.into_iter().zip(outcomes) {
            match outcome {
                Ok(candidate) => pool.candidates.push(candidate),
                Err(e) => pool.failures.push(CandidateFailure {
                    prompt_id: prompt.id.clone(),
                    pathway,
                    error: e.to_string(),
                }),
            }
        }
        if pool.candidates.is_empty() {
            return Err(GenError::AllPathwaysFailed { prompt_id: prompt.id.clone() });
        }
        Ok(pool)
    }
}

/// Generate pools for a batch of prompts with bounded prompt-level
/// concurrency; results come back in input order.
pub async fn generate_pool_batch(
    cfg: &PipelineConfig,
    backend: &dyn ChatBackend,
    prompts: &[Prompt],
) -> Vec<Result<CandidatePool, GenError>> {
    let generator = PathwayGenerator::new(cfg, backend);
    stream::iter(prompts)
        .map(|p| {
            let generator = &generator;
            async move { generator.generate_candidates(p).await }
        })
        .buffered(cfg.max_parallel_requests.max(1))
        .collect()
        .await
}
