//! The whole data pipeline through the library against the bundled mock
//! fixtures: generate -> rank -> build-dataset, all offline and
//! reproducible.
//!
//! ```bash
//! cargo run --example full_pipeline
//! ```

use std::path::Path;

use amct::backend::ChatClient;
use amct::dataset::{build_training_sequence, dataset_stats, emit_dataset};
use amct::genpath::generate_pool_batch;
use amct::jsonl::read_jsonl;
use amct::ranker::{filter_high_quality, rank_pool_batch, select_best};
use amct::{PipelineConfig, Prompt};

#[tokio::main]
async fn main() {
    let fixtures = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    let cfg = PipelineConfig::load(&fixtures.join("config_mock.toml")).unwrap();
    assert!(amct::validate_config(&cfg).is_empty());
    let prompts: Vec<Prompt> = read_jsonl(&fixtures.join("prompts_12.jsonl")).unwrap();
    let client = ChatClient::from_config(&cfg).unwrap();

    // Stage 1: candidate pools, one per prompt.
    let pools = generate_pool_batch(&cfg, &client, &prompts).await;
    let mut scored_input = Vec::new();
    for (prompt, pool) in prompts.iter().zip(pools) {
        let pool = pool.unwrap();
        println!("{}: {} candidate(s)", prompt.id, pool.candidates.len());
        scored_input.push((prompt.clone(), pool.candidates));
    }

    // Stage 2: reward scoring, filtering, selection.
    let results = rank_pool_batch(&cfg, &client, &scored_input).await;
    let mut examples = Vec::new();
    for ((prompt, _), result) in scored_input.iter().zip(results) {
        let (ranked, _failures) = result.unwrap();
        let kept = filter_high_quality(ranked, &cfg);
        if kept.is_empty() {
            println!("{}: dropped by the quality filter", prompt.id);
            continue;
        }
        let best = select_best(&kept, &cfg).unwrap();
        println!("{}: selected {} at {:.1}", prompt.id, best.candidate.pathway, best.score.value);

        // Stage 3: marker-formatted training example.
        examples.push(build_training_sequence(prompt, &best, &cfg).unwrap());
    }

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("dataset.jsonl");
    let written = emit_dataset(&examples, &out).unwrap();
    let stats = dataset_stats(&examples);
    println!("\nwrote {written} example(s); pathway mix: {:?}", stats.per_pathway);
}
