//! Reward-model ranking of candidate responses.
//!
//! Every candidate is scored by a single composite 0-10 reward pass whose
//! rubric covers factual accuracy, hallucination avoidance, redundancy, and
//! instruction compliance. The raw reward-model reply is retained verbatim
//! for audit; the numeric score is the last `SCORE:` marker followed by a
//! decimal number. Filtering keeps scores at or above the threshold
//! (inclusive), and selection takes the maximum with ties broken by the
//! configured pathway order.

use std::sync::OnceLock;

use futures::stream::{self, StreamExt};
use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{BackendError, ChatBackend, ChatMessage, ChatRequest};
use crate::config::{profile_names, PipelineConfig};
use crate::genpath::{CandidateResponse, IntermediateReasoning};
use crate::template::{render, TemplateError};
use crate::types::{Pathway, Prompt};

/// A parsed reward score plus the verbatim reward-model reply.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardScore {
    pub value: f64,
    pub raw_text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedCandidate {
    pub candidate: CandidateResponse,
    pub score: RewardScore,
}

/// A scoring call that failed, with the rendered error.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoringFailure {
    pub prompt_id: String,
    pub pathway: Pathway,
    pub error: String,
}

/// Persisted form of one ranked candidate. Ranked pools and selected
/// candidates both use this record, one JSON object per line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedRecord {
    pub prompt_id: String,
    pub pathway: Pathway,
    pub score: f64,
    pub final_text: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoning: Option<IntermediateReasoning>,
    pub raw_score_text: String,
}

impl From<&RankedCandidate> for RankedRecord {
    fn from(r: &RankedCandidate) -> Self {
        Self {
            prompt_id: r.candidate.prompt_id.clone(),
            pathway: r.candidate.pathway.clone(),
            score: r.score.value,
            final_text: r.candidate.final_text.clone(),
            reasoning: r.candidate.reasoning.clone(),
            raw_score_text: r.score.raw_text.clone(),
        }
    }
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ScoreError {
    #[error("no SCORE: marker in reward reply")]
    ScoreMissing,
    #[error("score {0} is outside [0, 10]")]
    ScoreOutOfRange(String),
    #[error("SCORE: marker present but not followed by a number")]
    ScoreUnparsable,
}

#[derive(Debug, Error)]
pub enum RankError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error("all scoring calls failed for prompt {prompt_id}")]
    AllScoringFailed { prompt_id: String },
    #[error("cannot select from an empty candidate pool")]
    EmptyPool,
}

/// Build the reward-model messages for one candidate: the rubric's four
/// criteria, the original prompt, the candidate's final response, and the
/// instruction to end with `SCORE: <number>`. Byte-identical across runs
/// for equal inputs.
pub fn build_scoring_prompt(
    cfg: &PipelineConfig,
    prompt: &Prompt,
    candidate: &CandidateResponse,
) -> Result<Vec<ChatMessage>, TemplateError> {
    let body = render(
        "scoring",
        &cfg.templates.scoring,
        &["prompt", "response"],
        &[
            ("prompt", &prompt.body_text()),
            ("response", &candidate.final_text),
        ],
    )?;
    Ok(vec![ChatMessage::user(body)])
}

fn score_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"SCORE:\s*(-?\d+(?:\.\d+)?)").expect("valid regex"))
}

/// Extract the last occurrence of `SCORE:` followed by a decimal number.
/// The value must lie in [0, 10].
pub fn parse_score(raw: &str) -> Result<RewardScore, ScoreError> {
    let last = score_regex().captures_iter(raw).last();
    match last {
        Some(caps) => {
            let digits = caps.get(1).expect("group 1").as_str();
            let value: f64 = digits.parse().map_err(|_| ScoreError::ScoreUnparsable)?;
            if !(0.0..=10.0).contains(&value) {
                return Err(ScoreError::ScoreOutOfRange(digits.to_string()));
            }
            Ok(RewardScore { value, raw_text: raw.to_string() })
        }
        None if raw.contains("SCORE:") => Err(ScoreError::ScoreUnparsable),
        None => Err(ScoreError::ScoreMissing),
    }
}

/// Score every candidate with the reward model. Failures are recorded per
/// candidate; the operation fails only when every call fails.
pub async fn score_candidates(
    cfg: &PipelineConfig,
    backend: &dyn ChatBackend,
    prompt: &Prompt,
    candidates: &[CandidateResponse],
) -> Result<(Vec<RankedCandidate>, Vec<ScoringFailure>), RankError> {
    let outcomes = futures::future::join_all(candidates.iter().map(|candidate| async move {
        let messages = build_scoring_prompt(cfg, prompt, candidate)?;
        let request = ChatRequest {
            profile_name: profile_names::REWARD.into(),
            messages,
            temperature: cfg.temperature_for(profile_names::REWARD),
            max_output_chars: crate::backend::DEFAULT_MAX_OUTPUT_CHARS,
            correlation_id: format!("{}/{}/score", prompt.id, candidate.pathway),
        };
        let completion = backend.complete(&request).await?;
        let score = parse_score(&completion.text)?;
        Ok::<RankedCandidate, RankError>(RankedCandidate { candidate: candidate.clone(), score })
    }))
    .await;

    let mut ranked = Vec::new();
    let mut failures = Vec::new();
    for (candidate, outcome) in candidates.iter().zip(outcomes) {
        match outcome {
            Ok(r) => ranked.push(r),
            Err(e) => failures.push(ScoringFailure {
                prompt_id: prompt.id.clone(),
                pathway: candidate.pathway.clone(),
                error: e.to_string(),
            }),
        }
    }
    if ranked.is_empty() && !candidates.is_empty() {
        return Err(RankError::AllScoringFailed { prompt_id: prompt.id.clone() });
    }
    Ok((ranked, failures))
}

/// Keep candidates whose score is at or above the threshold (inclusive);
/// identity when the filter is disabled.
pub fn filter_high_quality(ranked: Vec<RankedCandidate>, cfg: &PipelineConfig) -> Vec<RankedCandidate> {
    if !cfg.filter_enabled {
        return ranked;
    }
    ranked
        .into_iter()
        .filter(|r| r.score.value >= cfg.score_threshold)
        .collect()
}

/// Total order used for selection: higher score first, then earlier
/// tie-break rank, then stable textual keys so the result is invariant
/// under input permutation even for duplicated pathways.
fn selection_key<'a>(cfg: &PipelineConfig, r: &'a RankedCandidate) -> (f64, usize, String, &'a str) {
    (
        r.score.value,
        cfg.tiebreak_rank(&r.candidate.pathway),
        r.candidate.pathway.to_string(),
        r.candidate.final_text.as_str(),
    )
}

/// The highest-scoring candidate; ties go to the pathway that appears
/// earlier in the configured tie-break order.
pub fn select_best(ranked: &[RankedCandidate], cfg: &PipelineConfig) -> Result<RankedCandidate, RankError> {
    ranked
        .iter()
        .min_by(|a, b| {
            let (sa, ra, pa, ta) = selection_key(cfg, a);
            let (sb, rb, pb, tb) = selection_key(cfg, b);
            // Max score wins; everything else ascending.
            sb.partial_cmp(&sa)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(ra.cmp(&rb))
                .then(pa.cmp(&pb))
                .then(ta.cmp(tb))
        })
        .cloned()
        .ok_or(RankError::EmptyPool)
}

/// Rank, filter, and pick the best candidate per ranked pool entry; pools
/// run concurrently bounded by `max_parallel_requests`, and results come
/// back in input order.
pub async fn rank_pool_batch(
    cfg: &PipelineConfig,
    backend: &dyn ChatBackend,
    pools: &[(Prompt, Vec<CandidateResponse>)],
) -> Vec<Result<(Vec<RankedCandidate>, Vec<ScoringFailure>), RankError>> {
    stream::iter(pools)
        .map(|(prompt, candidates)| async move {
            score_candidates(cfg, backend, prompt, candidates).await
        })
        .buffered(cfg.max_parallel_requests.max(1))
        .collect()
        .await
}
