//! Adaptive multilingual chain-of-thought data pipeline.
//!
//! Generates candidate responses through multiple reasoning pathways
//! (direct generation plus cross-lingual chain-of-thought through auxiliary
//! "thinking languages"), ranks them with a reward model, builds
//! marker-formatted fine-tuning datasets with supervision masks, and
//! evaluates multilingual model outputs for accuracy, cross-lingual
//! consistency, routing behavior, and internal-representation alignment.
//!
//! The library is the primary interface; see `examples/` for one runnable
//! example per capability and the `amct` binary for the stage-per-subcommand
//! CLI (`generate`, `rank`, `build-dataset`, `eval`, `analyze`,
//! `introspect`).
//!
//! Everything runs offline against the deterministic mock backend; live
//! OpenAI-compatible endpoints are configured per profile with secrets
//! taken from environment variables.

pub mod backend;
pub mod cli;
pub mod config;
pub mod dataset;
pub mod digest;
pub mod eval;
pub mod genpath;
pub mod introspect;
pub mod jsonl;
pub mod ranker;
pub mod report;
pub mod template;
pub mod types;

pub use backend::{ChatBackend, ChatClient, ChatMessage, ChatRequest, Completion, MockScript};
pub use config::{validate_config, MarkerPair, MarkerRegistry, PipelineConfig};
pub use types::{Choice, LanguageTag, Pathway, Prompt, TaskKind};
