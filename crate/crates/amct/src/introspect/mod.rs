//! Desk-scale interpretability over exported tensors: logit-lens top-1
//! grids and language-centroid gap metrics with a deterministic 2-D
//! projection. Nothing here runs a model forward pass; dumps are produced
//! elsewhere and loaded from the fixed binary format in [`dump`].

pub mod dump;
pub mod geometry;
pub mod lens;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::types::LanguageTag;

pub use dump::{load_hidden_dump, load_unembedding, save_hidden_dump, save_unembedding};
pub use geometry::{centroid_gap, pca_project, CentroidGap, PcaProjection};
pub use lens::{logit_lens_grid, LensCell};

#[derive(Debug, Error)]
pub enum IntrospectError {
    #[error("dimension mismatch: {0}")]
    DimMismatch(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("reference label {0} has no vectors")]
    MissingReference(LanguageTag),
    #[error("no embeddings to analyze")]
    Empty,
    #[error("bad dump file: {0}")]
    Format(String),
    #[error("{0}")]
    Io(#[from] std::io::Error),
}

/// Layer-wise hidden states: `layers x positions x dim` values, row-major,
/// with one label per position.
#[derive(Debug, Clone, PartialEq)]
pub struct HiddenDump {
    pub layers: usize,
    pub positions: usize,
    pub dim: usize,
    pub data: Vec<f32>,
    pub position_labels: Vec<String>,
}

impl HiddenDump {
    pub fn new(
        layers: usize,
        positions: usize,
        dim: usize,
        data: Vec<f32>,
        position_labels: Vec<String>,
    ) -> Result<Self, IntrospectError> {
        let expected = layers
            .checked_mul(positions)
            .and_then(|n| n.checked_mul(dim))
            .ok_or_else(|| IntrospectError::DimMismatch("dump size overflows".into()))?;
        if data.len() != expected {
            return Err(IntrospectError::DimMismatch(format!(
                "expected {expected} values ({layers}x{positions}x{dim}), got {}",
                data.len()
            )));
        }
        if position_labels.len() != positions {
            return Err(IntrospectError::DimMismatch(format!(
                "expected {positions} position labels, got {}",
                position_labels.len()
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(IntrospectError::NonFinite("hidden dump"));
        }
        Ok(Self { layers, positions, dim, data, position_labels })
    }

    /// The hidden vector at (layer, position).
    pub fn vector(&self, layer: usize, position: usize) -> &[f32] {
        let offset = (layer * self.positions + position) * self.dim;
        &self.data[offset..offset + self.dim]
    }
}

/// The output vocabulary map: `vocab x dim` values, row-major, with one
/// string per vocabulary entry.
#[derive(Debug, Clone, PartialEq)]
pub struct Unembedding {
    pub vocab: usize,
    pub dim: usize,
    pub matrix: Vec<f32>,
    pub vocab_strings: Vec<String>,
}

impl Unembedding {
    pub fn new(
        vocab: usize,
        dim: usize,
        matrix: Vec<f32>,
        vocab_strings: Vec<String>,
    ) -> Result<Self, IntrospectError> {
        let expected = vocab
            .checked_mul(dim)
            .ok_or_else(|| IntrospectError::DimMismatch("matrix size overflows".into()))?;
        if matrix.len() != expected {
            return Err(IntrospectError::DimMismatch(format!(
                "expected {expected} values ({vocab}x{dim}), got {}",
                matrix.len()
            )));
        }
        if vocab_strings.len() != vocab {
            return Err(IntrospectError::DimMismatch(format!(
                "expected {vocab} vocab strings, got {}",
                vocab_strings.len()
            )));
        }
        if !matrix.iter().all(|v| v.is_finite()) {
            return Err(IntrospectError::NonFinite("unembedding"));
        }
        Ok(Self { vocab, dim, matrix, vocab_strings })
    }

    pub fn row(&self, v: usize) -> &[f32] {
        &self.matrix[v * self.dim..(v + 1) * self.dim]
    }
}

/// One labeled embedding vector, as stored in the embeddings JSONL file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledVector {
    pub label: LanguageTag,
    pub vector: Vec<f64>,
}

/// A set of labeled embedding vectors of uniform dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledEmbeddings {
    entries: Vec<LabeledVector>,
    dim: usize,
}

impl LabeledEmbeddings {
    pub fn new(entries: Vec<LabeledVector>) -> Result<Self, IntrospectError> {
        let dim = match entries.first() {
            Some(first) => first.vector.len(),
            None => return Err(IntrospectError::Empty),
        };
        if dim == 0 {
            return Err(IntrospectError::DimMismatch("zero-dimensional vectors".into()));
        }
        for entry in &entries {
            if entry.vector.len() != dim {
                return Err(IntrospectError::DimMismatch(format!(
                    "label {} has dimension {}, expected {dim}",
                    entry.label,
                    entry.vector.len()
                )));
            }
            if !entry.vector.iter().all(|v| v.is_finite()) {
                return Err(IntrospectError::NonFinite("embeddings"));
            }
        }
        Ok(Self { entries, dim })
    }

    pub fn entries(&self) -> &[LabeledVector] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
