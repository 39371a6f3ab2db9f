//! Multiple-choice answer extraction.
//!
//! Deterministic matching runs first (a uniquely occurring label token, or
//! a uniquely contained choice text); only genuinely ambiguous answers fall
//! back to the extractor model, cutting backend calls and nondeterminism.

use crate::backend::{ChatBackend, ChatRequest};
use crate::config::{profile_names, PipelineConfig};
use crate::template::render;
use crate::types::Choice;

use super::EvalError;

/// True when `label` occurs in `text` delimited by non-alphanumeric
/// characters (or the text edges).
fn label_token_present(text: &str, label: &str) -> bool {
    if label.is_empty() {
        return false;
    }
    let bytes = text.as_bytes();
    let mut from = 0;
    while let Some(pos) = text[from..].find(label) {
        let start = from + pos;
        let end = start + label.len();
        let before_ok = start == 0 || !bytes[start - 1].is_ascii_alphanumeric();
        let after_ok = end == text.len() || !bytes[end].is_ascii_alphanumeric();
        if before_ok && after_ok {
            return true;
        }
        from = start + 1;
    }
    false
}

/// Deterministic extraction: a label that occurs as a standalone token
/// (case-sensitive, so the article "a" never matches label "A"), or the
/// unique choice whose full text is contained in the answer. `None` means
/// ambiguous or no evidence.
pub fn deterministic_extract(answer: &str, choices: &[Choice]) -> Option<String> {
    let token_hits: Vec<&Choice> = choices
        .iter()
        .filter(|c| label_token_present(answer, &c.label))
        .collect();
    if let [only] = token_hits.as_slice() {
        return Some(only.label.clone());
    }

    let lowered = answer.to_lowercase();
    let containment_hits: Vec<&Choice> = choices
        .iter()
        .filter(|c| !c.text.trim().is_empty() && lowered.contains(&c.text.to_lowercase()))
        .collect();
    if let [only] = containment_hits.as_slice() {
        return Some(only.label.clone());
    }
    None
}

fn normalize_label_reply(reply: &str) -> &str {
    reply.trim().trim_matches(|c: char| {
        c == '.' || c == ',' || c == '"' || c == '\'' || c == '(' || c == ')' || c == '*' || c == ':'
    })
}

/// Extract the chosen label from a free-form answer, falling back to the
/// extractor backend with a reply-with-the-label-only template. The reply
/// must name a valid label.
pub async fn extract_choice(
    cfg: &PipelineConfig,
    backend: &dyn ChatBackend,
    prompt_id: &str,
    question: &str,
    answer: &str,
    choices: &[Choice],
) -> Result<String, EvalError> {
    if let Some(label) = deterministic_extract(answer, choices) {
        return Ok(label);
    }

    let choices_block: String = choices
        .iter()
        .map(|c| format!("{}: {}", c.label, c.text))
        .collect::<Vec<_>>()
        .join("\n");
    let body = render(
        "extract",
        &cfg.templates.extract,
        &["prompt", "choices", "response"],
        &[("prompt", question), ("choices", &choices_block), ("response", answer)],
    )?;
    let request = ChatRequest::from_user_text(
        profile_names::EXTRACTOR,
        body,
        cfg.temperature_for(profile_names::EXTRACTOR),
        format!("{prompt_id}/extract"),
    );
    let reply = backend.complete(&request).await?.text;
    let normalized = normalize_label_reply(&reply);
    choices
        .iter()
        .find(|c| c.label.eq_ignore_ascii_case(normalized))
        .map(|c| c.label.clone())
        .ok_or_else(|| EvalError::ExtractionFailed {
            prompt_id: prompt_id.to_string(),
            message: format!("extractor reply {reply:?} is not a valid label"),
        })
}
