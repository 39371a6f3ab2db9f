//! Score candidates with the reward rubric, filter by the inclusive
//! threshold, and select the best pathway with deterministic tie-breaks.
//!
//! ```bash
//! cargo run --example rank_and_select
//! ```

use amct::backend::{ChatClient, Matcher, MockRule, MockScript};
use amct::genpath::CandidateResponse;
use amct::ranker::{filter_high_quality, parse_score, score_candidates, select_best};
use amct::{LanguageTag, Pathway, PipelineConfig, Prompt, TaskKind};

fn candidate(pathway: Pathway, text: &str) -> CandidateResponse {
    CandidateResponse {
        prompt_id: "demo".into(),
        pathway,
        reasoning: None,
        final_text: text.into(),
        final_language: LanguageTag::new("en").unwrap(),
    }
}

#[tokio::main(flavor = "current_thread")]
async fn main() {
    let cfg = PipelineConfig::new(vec![
        LanguageTag::new("en").unwrap(),
        LanguageTag::new("zh").unwrap(),
    ]);
    let prompt = Prompt {
        id: "demo".into(),
        text: "Which expressway in Singapore is the longest?".into(),
        language: LanguageTag::new("en").unwrap(),
        group_id: None,
        task_kind: TaskKind::OpenEnded,
        choices: None,
        gold: None,
    };
    let candidates = vec![
        candidate(Pathway::Direct, "Probably the KPE."),
        candidate(Pathway::think_in("en").unwrap(), "The PIE, at roughly 44 km."),
        candidate(Pathway::think_in("zh").unwrap(), "It is the PIE."),
    ];

    // The reward mock grades each response text; replies end with the
    // SCORE: contract that parse_score extracts.
    let script = MockScript {
        seed: 3,
        rules: vec![
            MockRule {
                matcher: Matcher::Substring("Probably the KPE".into()),
                response_template: "Confidently wrong. SCORE: 4.5".into(),
            },
            MockRule {
                matcher: Matcher::Substring("roughly 44 km".into()),
                response_template: "Accurate and complete. SCORE: 9.5".into(),
            },
            MockRule {
                matcher: Matcher::Substring("It is the PIE".into()),
                response_template: "Right but terse. SCORE: 9.0".into(),
            },
        ],
        fallback_template: "SCORE: 5".into(),
    };
    let client = ChatClient::single_script_mock(script, &["reward"]);

    let (ranked, failures) = score_candidates(&cfg, &client, &prompt, &candidates).await.unwrap();
    assert!(failures.is_empty());
    for r in &ranked {
        println!("{:<9} -> {:.1}  ({})", r.candidate.pathway.to_string(), r.score.value, r.score.raw_text);
    }

    let kept = filter_high_quality(ranked, &cfg);
    println!("kept after threshold {}: {}", cfg.score_threshold, kept.len());
    let best = select_best(&kept, &cfg).unwrap();
    println!("selected pathway: {}", best.candidate.pathway);

    // The parser takes the last SCORE: marker and enforces the 0-10 range.
    let parsed = parse_score("first draft SCORE: 9.5 ... final verdict SCORE: 7").unwrap();
    println!("last-marker parse: {}", parsed.value);
}
