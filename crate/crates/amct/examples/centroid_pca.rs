//! Language-centroid gap and the deterministic 2-D projection over labeled
//! embedding vectors.
//!
//! ```bash
//! cargo run --example centroid_pca
//! ```

use amct::introspect::{centroid_gap, pca_project, LabeledEmbeddings, LabeledVector};
use amct::LanguageTag;
use rand::{Rng, SeedableRng};

fn main() {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    // Three language clusters in 8 dimensions: English at the origin,
    // Chinese offset along one direction, Indonesian further out.
    let mut entries = Vec::new();
    for (code, offset) in [("en", 0.0), ("zh", 4.0), ("id", 7.0)] {
        for _ in 0..20 {
            let mut vector: Vec<f64> = (0..8).map(|_| rng.gen_range(-0.5..0.5)).collect();
            vector[0] += offset;
            vector[1] += offset / 2.0;
            entries.push(LabeledVector { label: LanguageTag::new(code).unwrap(), vector });
        }
    }
    let embeddings = LabeledEmbeddings::new(entries).unwrap();

    let reference = LanguageTag::new("en").unwrap();
    let gap = centroid_gap(&embeddings, &reference).unwrap();
    println!("centroid distances to {reference}:");
    for (label, distance) in &gap.distances {
        println!("  {label}  {distance:.3}");
    }
    println!("mean gap: {:.3}", gap.mean);

    // A fixed-seed power iteration, so coordinates are identical run to
    // run; the sign convention pins each axis orientation.
    let projection = pca_project(&embeddings).unwrap();
    println!(
        "\ntop-2 eigenvalues: {:.2}, {:.2} (degenerate: {})",
        projection.eigenvalues[0], projection.eigenvalues[1], projection.degenerate
    );
    for (entry, coords) in embeddings.entries().iter().zip(&projection.coords).step_by(20) {
        println!("  {}  ({:+.3}, {:+.3})", entry.label, coords[0], coords[1]);
    }
}
