//! Language-centroid gap metrics and the deterministic 2-D projection.
//!
//! The centroid gap is computed in the original embedding space: per-label
//! arithmetic-mean centroids, Euclidean distance to the reference centroid,
//! unweighted mean over the non-reference labels. The projection is plain
//! PCA (mean-centering, power iteration with deflation, fixed seed,
//! tolerance 1e-9) with the sign convention that each axis's first nonzero
//! component is positive.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::types::LanguageTag;

use super::{IntrospectError, LabeledEmbeddings};

/// Distances from each non-reference label's centroid to the reference
/// centroid, plus their unweighted mean.
#[derive(Debug, Clone, PartialEq)]
pub struct CentroidGap {
    pub reference: LanguageTag,
    pub distances: BTreeMap<LanguageTag, f64>,
    pub mean: f64,
}

/// Per-label centroid distances to the reference label's centroid.
pub fn centroid_gap(
    embeddings: &LabeledEmbeddings,
    reference: &LanguageTag,
) -> Result<CentroidGap, IntrospectError> {
    let dim = embeddings.dim();
    let mut sums: BTreeMap<&LanguageTag, (Vec<f64>, usize)> = BTreeMap::new();
    for entry in embeddings.entries() {
        let (sum, count) = sums
            .entry(&entry.label)
            .or_insert_with(|| (vec![0.0; dim], 0));
        for (s, v) in sum.iter_mut().zip(&entry.vector) {
            *s += v;
        }
        *count += 1;
    }

    let centroids: BTreeMap<&LanguageTag, Vec<f64>> = sums
        .into_iter()
        .map(|(label, (sum, count))| {
            (label, sum.into_iter().map(|s| s / count as f64).collect())
        })
        .collect();
    let reference_centroid = centroids
        .get(reference)
        .ok_or_else(|| IntrospectError::MissingReference(reference.clone()))?
        .clone();

    let mut distances = BTreeMap::new();
    for (label, centroid) in &centroids {
        if *label == reference {
            continue;
        }
        let dist = euclidean(centroid, &reference_centroid);
        distances.insert((*label).clone(), dist);
    }
    let mean = if distances.is_empty() {
        0.0
    } else {
        distances.values().sum::<f64>() / distances.len() as f64
    };
    Ok(CentroidGap { reference: reference.clone(), distances, mean })
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// A rank-2 projection of the embedding set, one coordinate pair per input
/// vector in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaProjection {
    pub coords: Vec<[f64; 2]>,
    pub axes: [Vec<f64>; 2],
    pub eigenvalues: [f64; 2],
    /// Fewer than 2 nonzero singular values: the second axis is zeros.
    pub degenerate: bool,
}

const PCA_SEED: u64 = 0x414d_4354; // "AMCT"
const PCA_TOLERANCE: f64 = 1e-9;
const PCA_MAX_ITERATIONS: usize = 20_000;

/// Project onto the top-2 principal directions of the mean-centered set.
#[allow(clippy::needless_range_loop)]
pub fn pca_project(embeddings: &LabeledEmbeddings) -> Result<PcaProjection, IntrospectError> {
    let dim = embeddings.dim();
    let n = embeddings.len();

    let mut mean = vec![0.0f64; dim];
    for entry in embeddings.entries() {
        for (m, v) in mean.iter_mut().zip(&entry.vector) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let centered: Vec<Vec<f64>> = embeddings
        .entries()
        .iter()
        .map(|e| e.vector.iter().zip(&mean).map(|(v, m)| v - m).collect())
        .collect();

    // Scatter matrix (unnormalized covariance); eigenvectors are the
    // principal directions either way.
    let mut scatter = vec![vec![0.0f64; dim]; dim];
    for row in &centered {
        for i in 0..dim {
            for j in i..dim {
                scatter[i][j] += row[i] * row[j];
            }
        }
    }
    for i in 0..dim {
        for j in 0..i {
            scatter[i][j] = scatter[j][i];
        }
    }

    let total_scale: f64 = (0..dim).map(|i| scatter[i][i]).sum();
    let mut rng = ChaCha8Rng::seed_from_u64(PCA_SEED);
    let mut axes: [Vec<f64>; 2] = [vec![0.0; dim], vec![0.0; dim]];
    let mut eigenvalues = [0.0f64; 2];
    let mut degenerate = false;

    for axis in 0..2 {
        match power_iteration(&scatter, &mut rng, total_scale) {
            Some((vector, value)) => {
                // Deflate before the sign flip; the outer product is
                // sign-invariant but keeping the iteration vector is tidier.
                for i in 0..dim {
                    for j in 0..dim {
                        scatter[i][j] -= value * vector[i] * vector[j];
                    }
                }
                axes[axis] = fix_sign(vector);
                eigenvalues[axis] = value;
            }
            None => {
                degenerate = true;
                break;
            }
        }
    }

    let coords: Vec<[f64; 2]> = centered
        .iter()
        .map(|row| [dot(row, &axes[0]), dot(row, &axes[1])])
        .collect();
    Ok(PcaProjection { coords, axes, eigenvalues, degenerate })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Flip the axis so its first component with magnitude above the tolerance
/// is positive.
fn fix_sign(mut axis: Vec<f64>) -> Vec<f64> {
    if let Some(first) = axis.iter().find(|v| v.abs() > PCA_TOLERANCE) {
        if *first < 0.0 {
            for v in &mut axis {
                *v = -*v;
            }
        }
    }
    axis
}

/// Dominant eigenpair of a symmetric PSD matrix, or `None` when the
/// spectrum has effectively vanished (relative to `scale`).
fn power_iteration(
    matrix: &[Vec<f64>],
    rng: &mut ChaCha8Rng,
    scale: f64,
) -> Option<(Vec<f64>, f64)> {
    let dim = matrix.len();
    let floor = (scale.max(1e-300)) * 1e-12;

    let mut v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let n = norm(&v);
    if n == 0.0 {
        v[0] = 1.0;
    } else {
        for x in &mut v {
            *x /= n;
        }
    }

    let mut eigenvalue = 0.0;
    for _ in 0..PCA_MAX_ITERATIONS {
        let mut w: Vec<f64> = (0..dim).map(|i| dot(&matrix[i], &v)).collect();
        let len = norm(&w);
        if len <= floor {
            return None;
        }
        for x in &mut w {
            *x /= len;
        }
        let delta = v
            .iter()
            .zip(&w)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        eigenvalue = len;
        v = w;
        if delta < PCA_TOLERANCE {
            break;
        }
    }
    Some((v, eigenvalue))
}
