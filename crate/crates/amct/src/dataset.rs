//! Marker-formatted training sequences with byte-span partitions and
//! supervision masks, plus the versioned JSONL dataset format.
//!
//! A cross-lingual example is laid out as
//! `prompt <q-marker> reasoning <r-marker> response` and a direct example as
//! `prompt <q-marker> response`, joined by single spaces so byte offsets
//! are portable. The supervision mask excludes the prompt from the
//! training signal; reasoning, the answer marker, and the response are
//! always supervised, and the reasoning-phase marker is supervised unless
//! configured off. Joiner spaces take the weight of the span they follow,
//! so the space after the prompt is unsupervised.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::PipelineConfig;
use crate::jsonl::{self, JsonlError};
use crate::ranker::RankedCandidate;
use crate::template::TEMPLATE_VERSION;
use crate::types::{Pathway, Prompt};

/// Dataset schema version written into every record.
pub const SCHEMA_VERSION: &str = "amct-1";

/// Half-open byte range into the training sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[usize; 2]", into = "[usize; 2]")]
pub struct ByteSpan {
    pub start: usize,
    pub end: usize,
}

impl ByteSpan {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

impl From<[usize; 2]> for ByteSpan {
    fn from([start, end]: [usize; 2]) -> Self {
        Self { start, end }
    }
}

impl From<ByteSpan> for [usize; 2] {
    fn from(s: ByteSpan) -> Self {
        [s.start, s.end]
    }
}

/// The segment partition of one training sequence. Spans are strictly
/// ordered, non-overlapping, separated by single-space joiners, and cover
/// the sequence together with those joiners.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanMap {
    pub prompt: ByteSpan,
    pub q_marker: ByteSpan,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reasoning: Option<ByteSpan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_marker: Option<ByteSpan>,
    pub response: ByteSpan,
}

impl SpanMap {
    /// Present spans with their names, in sequence order.
    pub fn ordered(&self) -> Vec<(&'static str, ByteSpan)> {
        let mut out = vec![("prompt", self.prompt), ("q_marker", self.q_marker)];
        if let Some(r) = self.reasoning {
            out.push(("reasoning", r));
        }
        if let Some(r) = self.r_marker {
            out.push(("r_marker", r));
        }
        out.push(("response", self.response));
        out
    }

    /// Check the partition against its sequence: ordering, single-space
    /// joiners, full coverage, code-point-aligned boundaries, and the
    /// reasoning/r_marker pairing.
    pub fn validate(&self, sequence: &str) -> Result<(), String> {
        if self.reasoning.is_some() != self.r_marker.is_some() {
            return Err("reasoning and r_marker must be present together".into());
        }
        let spans = self.ordered();
        let mut cursor = 0usize;
        for (i, (name, span)) in spans.iter().enumerate() {
            if span.start != cursor {
                return Err(format!("span {name} starts at {} but expected {cursor}", span.start));
            }
            if span.is_empty() || span.end < span.start {
                return Err(format!("span {name} is empty or inverted"));
            }
            if span.end > sequence.len() {
                return Err(format!("span {name} ends past the sequence"));
            }
            if !sequence.is_char_boundary(span.start) || !sequence.is_char_boundary(span.end) {
                return Err(format!("span {name} is not on code-point boundaries"));
            }
            cursor = span.end;
            let is_last = i + 1 == spans.len();
            if !is_last {
                if sequence.as_bytes().get(cursor) != Some(&b' ') {
                    return Err(format!("joiner after {name} is not a single space"));
                }
                cursor += 1;
            }
        }
        if cursor != sequence.len() {
            return Err(format!(
                "spans cover {cursor} bytes but the sequence has {}",
                sequence.len()
            ));
        }
        Ok(())
    }

    /// Rebuild the sequence from its segments and single-space joiners.
    pub fn reconstruct(&self, sequence: &str) -> String {
        self.ordered()
            .iter()
            .map(|(_, s)| &sequence[s.start..s.end])
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// One marker-formatted training example.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingExample {
    pub id: String,
    pub sequence: String,
    pub spans: SpanMap,
    /// Span-level supervision weights, expanded to bytes by
    /// [`compute_supervision_mask`].
    pub supervision_mask: Vec<(String, u8)>,
    pub pathway: Pathway,
    pub score: f64,
    pub meta: BTreeMap<String, serde_json::Value>,
}

/// On-disk record: the example plus the schema version, one JSON object
/// per line with exactly these fields.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DatasetRecord {
    id: String,
    sequence: String,
    spans: SpanMap,
    mask: Vec<(String, u8)>,
    pathway: Pathway,
    score: f64,
    meta: BTreeMap<String, serde_json::Value>,
    version: String,
}

impl From<&TrainingExample> for DatasetRecord {
    fn from(ex: &TrainingExample) -> Self {
        Self {
            id: ex.id.clone(),
            sequence: ex.sequence.clone(),
            spans: ex.spans.clone(),
            mask: ex.supervision_mask.clone(),
            pathway: ex.pathway.clone(),
            score: ex.score,
            meta: ex.meta.clone(),
            version: SCHEMA_VERSION.to_string(),
        }
    }
}

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("marker {marker:?} occurs inside the {segment} text")]
    MarkerCollision { marker: String, segment: &'static str },
    #[error("dataset schema error: {0}")]
    Schema(String),
    #[error(transparent)]
    Io(#[from] JsonlError),
}

/// Fine-tuning hyperparameter hints carried in every record's metadata for
/// downstream trainers.
fn finetune_hints() -> serde_json::Value {
    serde_json::json!({
        "lora_rank": 32,
        "lora_alpha": 64,
        "learning_rate": 5e-5,
        "batch_size": 256,
        "max_tokens": 3000,
        "warmup_steps": 500,
    })
}

/// Build the training sequence for a selected candidate.
///
/// Markers are the prompt language's registry entry. Any marker literal
/// occurring inside the prompt, reasoning, or response text is a
/// collision: offsets would become ambiguous for downstream consumers.
pub fn build_training_sequence(
    prompt: &Prompt,
    best: &RankedCandidate,
    cfg: &PipelineConfig,
) -> Result<TrainingExample, DatasetError> {
    let markers = cfg.marker_registry.markers_for(&prompt.language);
    let prompt_text = prompt.body_text();
    let response_text = &best.candidate.final_text;
    let reasoning_text = best.candidate.reasoning.as_ref().map(|r| r.text.as_str());

    let mut content_segments = vec![("prompt", prompt_text.as_str()), ("response", response_text.as_str())];
    if let Some(r) = reasoning_text {
        content_segments.push(("reasoning", r));
    }
    for marker in [&markers.reasoning, &markers.answer] {
        for (segment, text) in &content_segments {
            if text.contains(marker.as_str()) {
                return Err(DatasetError::MarkerCollision {
                    marker: marker.clone(),
                    segment,
                });
            }
        }
    }

    let mut sequence = String::new();
    let push_segment = |sequence: &mut String, text: &str| -> ByteSpan {
        if !sequence.is_empty() {
            sequence.push(' ');
        }
        let start = sequence.len();
        sequence.push_str(text);
        ByteSpan { start, end: sequence.len() }
    };

    let prompt_span = push_segment(&mut sequence, &prompt_text);
    let q_span = push_segment(&mut sequence, &markers.reasoning);
    let (reasoning_span, r_span) = match reasoning_text {
        Some(r) => {
            let reasoning_span = push_segment(&mut sequence, r);
            let r_span = push_segment(&mut sequence, &markers.answer);
            (Some(reasoning_span), Some(r_span))
        }
        None => (None, None),
    };
    let response_span = push_segment(&mut sequence, response_text);

    let spans = SpanMap {
        prompt: prompt_span,
        q_marker: q_span,
        reasoning: reasoning_span,
        r_marker: r_span,
        response: response_span,
    };
    debug_assert!(spans.validate(&sequence).is_ok());

    let q_weight = u8::from(cfg.supervise_q_marker);
    let mut supervision_mask = vec![("prompt".to_string(), 0), ("q_marker".to_string(), q_weight)];
    if reasoning_span.is_some() {
        supervision_mask.push(("reasoning".to_string(), 1));
        supervision_mask.push(("r_marker".to_string(), 1));
    }
    supervision_mask.push(("response".to_string(), 1));

    let mut meta = BTreeMap::new();
    let model_of = |profile: &str| -> serde_json::Value {
        cfg.backends
            .get(profile)
            .and_then(|p| p.model_name.clone())
            .unwrap_or_else(|| "mock".to_string())
            .into()
    };
    meta.insert("prompt_language".into(), prompt.language.as_str().into());
    if let Some(r) = &best.candidate.reasoning {
        meta.insert("reasoning_language".into(), r.language.as_str().into());
    }
    meta.insert(
        "markers".into(),
        serde_json::json!({ "reasoning": markers.reasoning, "answer": markers.answer }),
    );
    meta.insert("generation_model".into(), model_of(crate::config::profile_names::GENERATION));
    meta.insert("reward_model".into(), model_of(crate::config::profile_names::REWARD));
    meta.insert("template_version".into(), TEMPLATE_VERSION.into());
    meta.insert("finetune_hints".into(), finetune_hints());

    Ok(TrainingExample {
        id: prompt.id.clone(),
        sequence,
        spans,
        supervision_mask,
        pathway: best.candidate.pathway.clone(),
        score: best.score.value,
        meta,
    })
}

/// Expand span-level weights to a per-byte mask. Joiner spaces take the
/// weight of the span they follow. The mask always covers every byte of
/// the sequence.
pub fn compute_supervision_mask(ex: &TrainingExample) -> Vec<u8> {
    let weights: BTreeMap<&str, u8> = ex
        .supervision_mask
        .iter()
        .map(|(name, w)| (name.as_str(), *w))
        .collect();
    let mut mask = vec![0u8; ex.sequence.len()];
    let spans = ex.spans.ordered();
    for (i, (name, span)) in spans.iter().enumerate() {
        let weight = weights.get(name).copied().unwrap_or(0);
        for byte in &mut mask[span.start..span.end] {
            *byte = weight;
        }
        let is_last = i + 1 == spans.len();
        if !is_last && span.end < mask.len() {
            mask[span.end] = weight;
        }
    }
    mask
}

/// Serialize examples to a versioned JSONL file (atomic). Returns the
/// number of records written.
pub fn emit_dataset(examples: &[TrainingExample], path: &std::path::Path) -> Result<usize, DatasetError> {
    let records: Vec<DatasetRecord> = examples.iter().map(DatasetRecord::from).collect();
    Ok(jsonl::write_jsonl(path, &records)?)
}

/// Load a dataset file, checking the schema version and span validity of
/// every record.
pub fn load_dataset(path: &std::path::Path) -> Result<Vec<TrainingExample>, DatasetError> {
    let records: Vec<DatasetRecord> = jsonl::read_jsonl(path)?;
    let mut out = Vec::with_capacity(records.len());
    for (i, record) in records.into_iter().enumerate() {
        if record.version != SCHEMA_VERSION {
            return Err(DatasetError::Schema(format!(
                "record {}: version {:?} does not match {SCHEMA_VERSION:?}",
                i + 1,
                record.version
            )));
        }
        record
            .spans
            .validate(&record.sequence)
            .map_err(|e| DatasetError::Schema(format!("record {}: {e}", i + 1)))?;
        for (name, weight) in &record.mask {
            if *weight > 1 {
                return Err(DatasetError::Schema(format!(
                    "record {}: mask weight for {name} must be 0 or 1",
                    i + 1
                )));
            }
        }
        out.push(TrainingExample {
            id: record.id,
            sequence: record.sequence,
            spans: record.spans,
            supervision_mask: record.mask,
            pathway: record.pathway,
            score: record.score,
            meta: record.meta,
        });
    }
    Ok(out)
}

/// Counts per pathway and prompt language, plus an integer-bin score
/// histogram (bin i covers [i, i+1), with 10 in the last bin).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DatasetStats {
    pub total: usize,
    pub per_pathway: BTreeMap<String, usize>,
    pub per_language: BTreeMap<String, usize>,
    pub score_histogram: [usize; 11],
}

pub fn dataset_stats(examples: &[TrainingExample]) -> DatasetStats {
    let mut stats = DatasetStats {
        total: examples.len(),
        per_pathway: BTreeMap::new(),
        per_language: BTreeMap::new(),
        score_histogram: [0; 11],
    };
    for ex in examples {
        *stats.per_pathway.entry(ex.pathway.to_string()).or_default() += 1;
        let language = ex
            .meta
            .get("prompt_language")
            .and_then(|v| v.as_str())
            .unwrap_or("unknown")
            .to_string();
        *stats.per_language.entry(language).or_default() += 1;
        let bin = (ex.score.clamp(0.0, 10.0).floor() as usize).min(10);
        stats.score_histogram[bin] += 1;
    }
    stats
}
