//! Logit-lens grids: project every layer's hidden state at every position
//! through the output vocabulary map and keep the top-1 token.

use super::{HiddenDump, IntrospectError, Unembedding};

/// One grid cell: the argmax vocabulary entry for a (layer, position).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LensCell {
    pub token_index: usize,
    pub token: String,
}

/// The layers x positions grid of top-1 tokens. Cell (l, t) is the vocab
/// row maximizing the dot product with the hidden vector; exact ties go to
/// the lowest index. Dot products accumulate in f64, sequentially, so
/// results are bit-stable.
pub fn logit_lens_grid(
    hidden: &HiddenDump,
    unembedding: &Unembedding,
) -> Result<Vec<Vec<LensCell>>, IntrospectError> {
    if hidden.dim != unembedding.dim {
        return Err(IntrospectError::DimMismatch(format!(
            "hidden dim {} vs unembedding dim {}",
            hidden.dim, unembedding.dim
        )));
    }
    if unembedding.vocab == 0 {
        return Err(IntrospectError::DimMismatch("empty vocabulary".into()));
    }
    if !hidden.data.iter().all(|v| v.is_finite()) {
        return Err(IntrospectError::NonFinite("hidden dump"));
    }
    if !unembedding.matrix.iter().all(|v| v.is_finite()) {
        return Err(IntrospectError::NonFinite("unembedding"));
    }

    let mut grid = Vec::with_capacity(hidden.layers);
    for layer in 0..hidden.layers {
        let mut row = Vec::with_capacity(hidden.positions);
        for position in 0..hidden.positions {
            let h = hidden.vector(layer, position);
            let mut best_index = 0usize;
            let mut best_logit = f64::NEG_INFINITY;
            for v in 0..unembedding.vocab {
                let logit: f64 = unembedding
                    .row(v)
                    .iter()
                    .zip(h)
                    .map(|(w, x)| f64::from(*w) * f64::from(*x))
                    .sum();
                if logit > best_logit {
                    best_logit = logit;
                    best_index = v;
                }
            }
            row.push(LensCell {
                token_index: best_index,
                token: unembedding.vocab_strings[best_index].clone(),
            });
        }
        grid.push(row);
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("p{i}")).collect()
    }

    fn vocab_strings(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("tok{i}")).collect()
    }

    #[test]
    fn identity_unembedding_recovers_planted_one_hots() {
        // V = d = 4; identity matrix; one-hot hidden states.
        let d = 4;
        let identity: Vec<f32> = (0..d * d)
            .map(|i| if i / d == i % d { 1.0 } else { 0.0 })
            .collect();
        let u = Unembedding::new(d, d, identity, vocab_strings(d)).unwrap();

        let planted = [2usize, 0, 3, 1, 1, 2];
        let mut data = vec![0.0f32; 2 * 3 * d];
        for (cell, &k) in planted.iter().enumerate() {
            data[cell * d + k] = 1.0;
        }
        let h = HiddenDump::new(2, 3, d, data, labels(3)).unwrap();
        let grid = logit_lens_grid(&h, &u).unwrap();
        let flat: Vec<usize> = grid.iter().flatten().map(|c| c.token_index).collect();
        assert_eq!(flat, planted);
        assert_eq!(grid[0][0].token, "tok2");
    }

    /// Brute-force triple-loop oracle, written independently of the
    /// implementation's iteration scheme.
    #[allow(clippy::needless_range_loop)]
    fn brute_force_grid(h: &HiddenDump, u: &Unembedding) -> Vec<Vec<usize>> {
        let mut out = vec![vec![0usize; h.positions]; h.layers];
        for l in 0..h.layers {
            for t in 0..h.positions {
                let mut best = 0usize;
                let mut best_val = f64::NEG_INFINITY;
                for v in 0..u.vocab {
                    let mut dot = 0f64;
                    for k in 0..h.dim {
                        dot += f64::from(u.matrix[v * u.dim + k])
                            * f64::from(h.data[(l * h.positions + t) * h.dim + k]);
                    }
                    if dot > best_val {
                        best_val = dot;
                        best = v;
                    }
                }
                out[l][t] = best;
            }
        }
        out
    }

    #[test]
    fn random_grids_match_the_brute_force_oracle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..25 {
            let (layers, positions, dim, vocab) = (3, 2, 4, 5);
            let data: Vec<f32> = (0..layers * positions * dim)
                .map(|_| rng.gen_range(-2.0..2.0))
                .collect();
            let matrix: Vec<f32> = (0..vocab * dim).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let h = HiddenDump::new(layers, positions, dim, data, labels(positions)).unwrap();
            let u = Unembedding::new(vocab, dim, matrix, vocab_strings(vocab)).unwrap();
            let grid = logit_lens_grid(&h, &u).unwrap();
            let flat: Vec<Vec<usize>> = grid
                .iter()
                .map(|row| row.iter().map(|c| c.token_index).collect())
                .collect();
            assert_eq!(flat, brute_force_grid(&h, &u));
        }
    }

    #[test]
    fn exact_ties_go_to_the_lowest_index() {
        // Rows 1 and 2 are identical; both tie on every input.
        let matrix = vec![
            0.0, 0.0, // row 0
            1.0, 1.0, // row 1
            1.0, 1.0, // row 2
        ];
        let u = Unembedding::new(3, 2, matrix, vocab_strings(3)).unwrap();
        let h = HiddenDump::new(1, 1, 2, vec![1.0, 2.0], labels(1)).unwrap();
        let grid = logit_lens_grid(&h, &u).unwrap();
        assert_eq!(grid[0][0].token_index, 1);
    }

    #[test]
    fn positive_rescaling_never_changes_the_grid() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        let (layers, positions, dim, vocab) = (2, 3, 4, 6);
        let data: Vec<f32> = (0..layers * positions * dim)
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let matrix: Vec<f32> = (0..vocab * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let h = HiddenDump::new(layers, positions, dim, data.clone(), labels(positions)).unwrap();
        let u = Unembedding::new(vocab, dim, matrix, vocab_strings(vocab)).unwrap();
        let base = logit_lens_grid(&h, &u).unwrap();

        // Scale each hidden vector by a different positive factor.
        let mut scaled = data;
        for cell in 0..layers * positions {
            let factor = 0.25 + cell as f32;
            for k in 0..dim {
                scaled[cell * dim + k] *= factor;
            }
        }
        let h_scaled = HiddenDump::new(layers, positions, dim, scaled, labels(positions)).unwrap();
        let rescaled = logit_lens_grid(&h_scaled, &u).unwrap();
        for (a, b) in base.iter().flatten().zip(rescaled.iter().flatten()) {
            assert_eq!(a.token_index, b.token_index);
        }
    }

    #[test]
    fn dimension_mismatch_is_rejected() {
        let h = HiddenDump::new(1, 1, 3, vec![0.0; 3], labels(1)).unwrap();
        let u = Unembedding::new(2, 2, vec![0.0; 4], vocab_strings(2)).unwrap();
        assert!(matches!(logit_lens_grid(&h, &u), Err(IntrospectError::DimMismatch(_))));
    }
}
