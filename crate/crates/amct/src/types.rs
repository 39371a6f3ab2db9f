//! Core domain types: language tags, prompts, and reasoning pathways.
//!
//! All of these are immutable value objects; they are safe to clone, share,
//! and send across tasks without synchronization.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A lowercase ISO 639-1/639-3 language identifier (2 or 3 ASCII letters).
///
/// The reserved word "unknown" is not representable here (it is 7 letters),
/// so detection results use `Option<LanguageTag>` with `None` standing in
/// for "unknown".
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct LanguageTag(String);

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("invalid language tag {0:?}: must be 2-3 lowercase ASCII letters")]
pub struct InvalidLanguageTag(pub String);

impl LanguageTag {
    pub fn new(code: impl Into<String>) -> Result<Self, InvalidLanguageTag> {
        let code = code.into();
        let ok = (2..=3).contains(&code.len()) && code.bytes().all(|b| b.is_ascii_lowercase());
        if ok {
            Ok(Self(code))
        } else {
            Err(InvalidLanguageTag(code))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// English display name for common codes, falling back to the code
    /// itself. Used when instruction templates address a language by name.
    pub fn display_name(&self) -> &str {
        match self.0.as_str() {
            "en" => "English",
            "zh" => "Chinese",
            "id" => "Indonesian",
            "ms" => "Malay",
            "fr" => "French",
            "de" => "German",
            "es" => "Spanish",
            "pt" => "Portuguese",
            "it" => "Italian",
            "nl" => "Dutch",
            "ru" => "Russian",
            "ja" => "Japanese",
            "ko" => "Korean",
            "ar" => "Arabic",
            "hi" => "Hindi",
            "bn" => "Bengali",
            "ta" => "Tamil",
            "te" => "Telugu",
            "th" => "Thai",
            "vi" => "Vietnamese",
            "tr" => "Turkish",
            "el" => "Greek",
            "he" => "Hebrew",
            "hu" => "Hungarian",
            "sv" => "Swedish",
            "uk" => "Ukrainian",
            other => other,
        }
    }
}

impl fmt::Display for LanguageTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl FromStr for LanguageTag {
    type Err = InvalidLanguageTag;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::new(s)
    }
}

impl TryFrom<String> for LanguageTag {
    type Error = InvalidLanguageTag;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        Self::new(s)
    }
}

impl From<LanguageTag> for String {
    fn from(tag: LanguageTag) -> String {
        tag.0
    }
}

/// How a prompt is answered: free text or by picking one labeled choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    OpenEnded,
    MultipleChoice,
}

/// One labeled answer option of a multiple-choice prompt.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Choice {
    pub label: String,
    pub text: String,
}

/// A task instance in a target language, optionally grouped with its
/// parallel translations via `group_id`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prompt {
    pub id: String,
    pub text: String,
    pub language: LanguageTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub group_id: Option<String>,
    pub task_kind: TaskKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub choices: Option<Vec<Choice>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold: Option<String>,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum PromptError {
    #[error("prompt {id}: text is empty")]
    EmptyText { id: String },
    #[error("prompt {id}: multiple_choice requires a nonempty choice list")]
    MissingChoices { id: String },
    #[error("prompt {id}: duplicate choice label {label:?}")]
    DuplicateLabel { id: String, label: String },
    #[error("prompt {id}: gold label {gold:?} is not among the choice labels")]
    GoldNotAChoice { id: String, gold: String },
}

impl Prompt {
    /// Check the structural invariants: nonempty text, nonempty and
    /// uniquely-labeled choices for multiple choice, and a gold label that
    /// refers to an existing choice.
    pub fn validate(&self) -> Result<(), PromptError> {
        if self.text.trim().is_empty() {
            return Err(PromptError::EmptyText { id: self.id.clone() });
        }
        let choices = self.choices.as_deref().unwrap_or(&[]);
        if self.task_kind == TaskKind::MultipleChoice && choices.is_empty() {
            return Err(PromptError::MissingChoices { id: self.id.clone() });
        }
        let mut seen = std::collections::BTreeSet::new();
        for c in choices {
            if !seen.insert(c.label.as_str()) {
                return Err(PromptError::DuplicateLabel {
                    id: self.id.clone(),
                    label: c.label.clone(),
                });
            }
        }
        if let Some(gold) = &self.gold {
            if !choices.iter().any(|c| &c.label == gold) {
                return Err(PromptError::GoldNotAChoice {
                    id: self.id.clone(),
                    gold: gold.clone(),
                });
            }
        }
        Ok(())
    }
}

/// A reasoning route: answer directly in the prompt language, or think in
/// an auxiliary language first.
///
/// The textual form is `"direct"` or `"think:<code>"` and round-trips
/// losslessly; that form is what config files and JSONL records carry.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pathway {
    Direct,
    ThinkIn(LanguageTag),
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("invalid pathway {0:?}: expected \"direct\" or \"think:<code>\"")]
pub struct InvalidPathway(pub String);

impl Pathway {
    pub fn think_in(code: &str) -> Result<Self, InvalidLanguageTag> {
        Ok(Self::ThinkIn(LanguageTag::new(code)?))
    }

    /// The auxiliary language, if any.
    pub fn thinking_language(&self) -> Option<&LanguageTag> {
        match self {
            Pathway::Direct => None,
            Pathway::ThinkIn(t) => Some(t),
        }
    }
}

impl fmt::Display for Pathway {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pathway::Direct => f.write_str("direct"),
            Pathway::ThinkIn(t) => write!(f, "think:{t}"),
        }
    }
}

impl FromStr for Pathway {
    type Err = InvalidPathway;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "direct" {
            return Ok(Pathway::Direct);
        }
        match s.strip_prefix("think:") {
            Some(code) => LanguageTag::new(code)
                .map(Pathway::ThinkIn)
                .map_err(|_| InvalidPathway(s.to_string())),
            None => Err(InvalidPathway(s.to_string())),
        }
    }
}

impl Serialize for Pathway {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Pathway {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
