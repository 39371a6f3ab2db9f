//! Evaluation harness: strip chain-of-thought from raw outputs, extract
//! multiple-choice answers, compute accuracy and cross-lingual consistency,
//! run judge scoring, and attribute reasoning pathways for routing
//! analytics.

pub mod extract;
pub mod language;
pub mod metrics;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{BackendError, ChatBackend, ChatRequest};
use crate::config::{profile_names, MarkerPair, PipelineConfig};
use crate::ranker::{parse_score, ScoreError};
use crate::template::{render, TemplateError};
use crate::types::{LanguageTag, Pathway, Prompt};

pub use extract::{deterministic_extract, extract_choice};
pub use language::detect_language;
pub use metrics::{
    accuracy, consistency, routing_distribution, transition_analysis, ConsistencyGroup,
    MetricError, TransitionAnalysis, TransitionCounts,
};

/// Per-item evaluation outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub prompt_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_id: Option<String>,
    pub language: LanguageTag,
    pub raw_output: String,
    pub stripped_answer: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub extracted_choice: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correct: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub judge_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detected_reasoning_language: Option<LanguageTag>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pathway_used: Option<Pathway>,
}

impl EvalRecord {
    /// `correct` may only be set when a choice was extracted.
    pub fn check(&self) -> Result<(), String> {
        if self.correct.is_some() && self.extracted_choice.is_none() {
            return Err(format!(
                "record {}: correct is set without an extracted choice",
                self.prompt_id
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Backend(#[from] BackendError),
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Score(#[from] ScoreError),
    #[error("extraction failed for {prompt_id}: {message}")]
    ExtractionFailed { prompt_id: String, message: String },
}

/// Text after the last answer marker, trimmed; the full text unchanged when
/// no marker is present. Idempotent: the result never contains a marker.
pub fn strip_reasoning(raw: &str, answer_markers: &[String]) -> String {
    let last = answer_markers
        .iter()
        .filter(|m| !m.is_empty())
        .filter_map(|m| raw.rfind(m.as_str()).map(|pos| pos + m.len()))
        .max();
    match last {
        Some(after) => raw[after..].trim().to_string(),
        None => raw.to_string(),
    }
}

/// Attribute the reasoning pathway of a raw output from its marker
/// structure: both markers mean cross-lingual reasoning (thinking language
/// detected from the span between them), a lone reasoning marker or no
/// markers mean direct answering. Returns (pathway, detected reasoning
/// language); an undetectable reasoning language leaves the pathway
/// unattributed.
pub fn infer_pathway(raw: &str, markers: &MarkerPair) -> (Option<Pathway>, Option<LanguageTag>) {
    if let Some(q_pos) = raw.find(&markers.reasoning) {
        let after_q = q_pos + markers.reasoning.len();
        if let Some(a_pos) = raw.rfind(&markers.answer) {
            if a_pos >= after_q {
                let span = &raw[after_q..a_pos];
                let detected = detect_language(span);
                return (detected.clone().map(Pathway::ThinkIn), detected);
            }
        }
    }
    (Some(Pathway::Direct), None)
}

/// Judge an open-ended response on the 0-10 scale. The reply must end with
/// the same `SCORE:` contract the reward model uses.
pub async fn judge_score(
    cfg: &PipelineConfig,
    backend: &dyn ChatBackend,
    prompt: &Prompt,
    response: &str,
) -> Result<f64, EvalError> {
    let body = render(
        "judge",
        &cfg.templates.judge,
        &["prompt", "response"],
        &[("prompt", &prompt.body_text()), ("response", response)],
    )?;
    let request = ChatRequest::from_user_text(
        profile_names::JUDGE,
        body,
        cfg.temperature_for(profile_names::JUDGE),
        format!("{}/judge", prompt.id),
    );
    let completion = backend.complete(&request).await?;
    Ok(parse_score(&completion.text)?.value)
}

/// One item of an evaluation dataset: `{id, group_id, language, question,
/// choices?, gold?}` per line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalItem {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_id: Option<String>,
    pub language: LanguageTag,
    pub question: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choices: Option<Vec<crate::types::Choice>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<String>,
}

impl EvalItem {
    pub fn to_prompt(&self) -> Prompt {
        Prompt {
            id: self.id.clone(),
            text: self.question.clone(),
            language: self.language.clone(),
            group_id: self.group_id.clone(),
            task_kind: if self.choices.as_deref().is_some_and(|c| !c.is_empty()) {
                crate::types::TaskKind::MultipleChoice
            } else {
                crate::types::TaskKind::OpenEnded
            },
            choices: self.choices.clone(),
            gold: self.gold.clone(),
        }
    }
}

/// One model output to evaluate: `{id, output}` per line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelOutput {
    pub id: String,
    pub output: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn markers() -> MarkerPair {
        MarkerPair { reasoning: "<reason:en>".into(), answer: "<answer>".into() }
    }

    #[test]
    fn strips_after_the_last_answer_marker() {
        let raw = "Q <reason:en> blah <answer> B";
        assert_eq!(strip_reasoning(raw, &["<answer>".into()]), "B");
    }

    #[test]
    fn no_marker_returns_the_full_text() {
        assert_eq!(strip_reasoning("plain answer", &["<answer>".into()]), "plain answer");
    }

    #[test]
    fn two_markers_take_the_last_scan_from_end() {
        let raw = "x <answer> first <answer> second";
        let stripped = strip_reasoning(raw, &["<answer>".into()]);
        assert_eq!(stripped, "second");

        // Reference scan-from-end implementation.
        fn reference(raw: &str, marker: &str) -> String {
            let mut best = None;
            let mut from = 0;
            while let Some(pos) = raw[from..].find(marker) {
                best = Some(from + pos);
                from += pos + 1;
            }
            match best {
                Some(pos) => raw[pos + marker.len()..].trim().to_string(),
                None => raw.to_string(),
            }
        }
        assert_eq!(stripped, reference(raw, "<answer>"));
    }

    #[test]
    fn strip_is_idempotent() {
        let markers = vec!["<answer>".into(), "<回答>".into()];
        for raw in ["a <answer> b", "no markers", "x <回答> y <answer> z", "  padded  "] {
            let once = strip_reasoning(raw, &markers);
            let twice = strip_reasoning(&once, &markers);
            assert_eq!(once, twice, "raw = {raw:?}");
        }
    }

    #[test]
    fn pathway_inference_from_marker_structure() {
        let m = markers();
        // Both markers with an English span: cross-lingual through English.
        let (pathway, detected) =
            infer_pathway("<reason:en> the answer should be B because <answer> B", &m);
        assert_eq!(pathway, Some(Pathway::think_in("en").unwrap()));
        assert_eq!(detected, Some(LanguageTag::new("en").unwrap()));

        // Lone reasoning marker: the simplified direct format.
        let (pathway, detected) = infer_pathway("<reason:en> B", &m);
        assert_eq!(pathway, Some(Pathway::Direct));
        assert_eq!(detected, None);

        // No markers at all: direct answering.
        let (pathway, _) = infer_pathway("just B", &m);
        assert_eq!(pathway, Some(Pathway::Direct));

        // Undetectable reasoning language: unattributed.
        let (pathway, detected) = infer_pathway("<reason:en> 12345 <answer> B", &m);
        assert_eq!(pathway, None);
        assert_eq!(detected, None);
    }

    #[test]
    fn record_invariant_rejects_correct_without_choice() {
        let record = EvalRecord {
            prompt_id: "e1".into(),
            group_id: None,
            language: LanguageTag::new("en").unwrap(),
            raw_output: "B".into(),
            stripped_answer: "B".into(),
            extracted_choice: None,
            correct: Some(true),
            judge_score: None,
            detected_reasoning_language: None,
            pathway_used: None,
        };
        assert!(record.check().is_err());
    }

    #[tokio::test]
    async fn judge_score_uses_the_score_contract() {
        use crate::backend::{ChatClient, Matcher, MockRule, MockScript};
        let script = MockScript {
            seed: 0,
            rules: vec![MockRule {
                matcher: Matcher::Substring("Rate the following response".into()),
                response_template: "coherent and correct. SCORE: 8.5".into(),
            }],
            fallback_template: "SCORE: 1".into(),
        };
        let client = ChatClient::single_script_mock(script, &[profile_names::JUDGE]);
        let cfg = PipelineConfig::new(vec![LanguageTag::new("en").unwrap()]);
        let prompt = Prompt {
            id: "p".into(),
            text: "Describe rain.".into(),
            language: LanguageTag::new("en").unwrap(),
            group_id: None,
            task_kind: crate::types::TaskKind::OpenEnded,
            choices: None,
            gold: None,
        };
        let score = judge_score(&cfg, &client, &prompt, "Rain is water.").await.unwrap();
        assert_eq!(score, 8.5);
    }
}
