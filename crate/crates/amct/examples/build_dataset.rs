//! Build marker-formatted training sequences with byte-span partitions and
//! supervision masks, then round-trip them through the dataset file.
//!
//! ```bash
//! cargo run --example build_dataset
//! ```

use amct::dataset::{
    build_training_sequence, compute_supervision_mask, emit_dataset, load_dataset,
};
use amct::genpath::{CandidateResponse, IntermediateReasoning};
use amct::ranker::{RankedCandidate, RewardScore};
use amct::{LanguageTag, Pathway, PipelineConfig, Prompt, TaskKind};

fn main() {
    let cfg = PipelineConfig::new(vec![
        LanguageTag::new("en").unwrap(),
        LanguageTag::new("zh").unwrap(),
    ]);
    let prompt = Prompt {
        id: "demo".into(),
        text: "抛两次硬币，至少有一个正面的概率是多少？".into(),
        language: LanguageTag::new("zh").unwrap(),
        group_id: None,
        task_kind: TaskKind::OpenEnded,
        choices: None,
        gold: None,
    };
    let best = RankedCandidate {
        candidate: CandidateResponse {
            prompt_id: prompt.id.clone(),
            pathway: Pathway::think_in("en").unwrap(),
            reasoning: Some(IntermediateReasoning {
                text: "three of the four outcomes contain at least one head, so 3/4".into(),
                language: LanguageTag::new("en").unwrap(),
                rephrased_prompt: "Flip a coin twice; P(at least one head)?".into(),
            }),
            final_text: "概率是 3/4。".into(),
            final_language: prompt.language.clone(),
        },
        score: RewardScore { value: 9.5, raw_text: "SCORE: 9.5".into() },
    };

    let example = build_training_sequence(&prompt, &best, &cfg).unwrap();
    println!("sequence: {}", example.sequence);
    for (name, span) in example.spans.ordered() {
        println!("  {name:<9} [{:>3}, {:>3})  {:?}", span.start, span.end,
            &example.sequence[span.start..span.end]);
    }

    // The per-byte mask: prompt bytes (and the joiner after them) are 0,
    // reasoning / markers / response are 1.
    let mask = compute_supervision_mask(&example);
    let supervised: usize = mask.iter().map(|w| *w as usize).sum();
    println!("supervised bytes: {supervised} of {}", mask.len());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dataset.jsonl");
    emit_dataset(std::slice::from_ref(&example), &path).unwrap();
    let loaded = load_dataset(&path).unwrap();
    assert_eq!(loaded[0], example);
    println!("round-trip through {} ok", path.display());
}
