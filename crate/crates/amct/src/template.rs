//! Instruction templates for every model call in the pipeline.
//!
//! Templates are fixed strings shipped with the crate and overridable per
//! field in the config file. Placeholders use `{name}` syntax; each template
//! has a required placeholder set that is checked before substitution so a
//! broken override fails loudly instead of producing a malformed prompt.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Version stamp recorded in dataset metadata so downstream consumers can
/// tell which template generation produced a sequence.
pub const TEMPLATE_VERSION: &str = "amct-templates-1";

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TemplateError {
    #[error("template {template:?} is missing required placeholder {{{placeholder}}}")]
    MissingPlaceholder {
        template: &'static str,
        placeholder: &'static str,
    },
}

/// The full template set. Defaults cover every pipeline stage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Templates {
    /// Restate a prompt in an auxiliary language. Needs {prompt}, {target_language}.
    pub rephrase: String,
    /// Produce intermediate reasoning in the auxiliary language. Needs {prompt}, {language}.
    pub reason: String,
    /// Rewrite intermediate reasoning as a final answer in the target
    /// language. Needs {prompt}, {reasoning}, {language}.
    pub integrate: String,
    /// Answer directly in the prompt language. Needs {prompt}, {language}.
    pub direct: String,
    /// Reward-model scoring prompt. Needs {prompt}, {response}.
    pub scoring: String,
    /// Choice extraction fallback. Needs {prompt}, {choices}, {response}.
    pub extract: String,
    /// Open-ended judge prompt. Needs {prompt}, {response}.
    pub judge: String,
}

impl Default for Templates {
    fn default() -> Self {
        Self {
            rephrase: "Restate the following question in {target_language}. Keep \
                       the meaning unchanged and reply with the restated question \
                       only.\n\n{prompt}"
                .into(),
            reason: "Answer the following question. Think step by step in \
                     {language} and give a complete answer in {language}.\n\n{prompt}"
                .into(),
            integrate: "You are given a question and a draft answer written in \
                        another language. Rewrite the draft as a final answer in \
                        {language}. Preserve the meaning of the draft and follow \
                        the question's instructions.\n\nQuestion:\n{prompt}\n\n\
                        Draft answer:\n{reasoning}"
                .into(),
            direct: "Answer the following question in {language}.\n\n{prompt}".into(),
            scoring: "You are grading a model response to a question. Judge it on \
                      four criteria: factual accuracy, hallucination avoidance, \
                      redundancy, and instruction compliance. Reply with a short \
                      justification, then a final line of the form SCORE: <number> \
                      where <number> is between 0 and 10.\n\nQuestion:\n{prompt}\n\n\
                      Response:\n{response}"
                .into(),
            extract: "Given a question, its answer choices, and a model response, \
                      decide which choice the response selects. Reply with the \
                      label only.\n\nQuestion:\n{prompt}\n\nChoices:\n{choices}\n\n\
                      Response:\n{response}"
                .into(),
            judge: "Rate the following response to the question on a scale of 0 \
                    to 10 for correctness, coherence, and instruction-following. \
                    Reply with a short justification, then a final line of the \
                    form SCORE: <number>.\n\nQuestion:\n{prompt}\n\nResponse:\n{response}"
                .into(),
        }
    }
}

/// Substitute `{name}` placeholders in `template`. Every name in `required`
/// must occur in the template; names not in `values` are left verbatim.
pub fn render(
    template_name: &'static str,
    template: &str,
    required: &[&'static str],
    values: &[(&str, &str)],
) -> Result<String, TemplateError> {
    for &placeholder in required {
        if !template.contains(&format!("{{{placeholder}}}")) {
            return Err(TemplateError::MissingPlaceholder {
                template: template_name,
                placeholder,
            });
        }
    }
    let mut out = template.to_string();
    for (name, value) in values {
        out = out.replace(&format!("{{{name}}}"), value);
    }
    Ok(out)
}
