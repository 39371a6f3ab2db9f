//! Routing analytics: pathway-selection distribution and base-vs-tuned
//! outcome transitions attributed to the tuned model's pathway.
//!
//! ```bash
//! cargo run --example routing_transitions
//! ```

use amct::eval::{routing_distribution, transition_analysis, EvalRecord};
use amct::{LanguageTag, Pathway};

fn record(id: &str, correct: bool, pathway: Option<Pathway>) -> EvalRecord {
    EvalRecord {
        prompt_id: id.into(),
        group_id: None,
        language: LanguageTag::new("en").unwrap(),
        raw_output: String::new(),
        stripped_answer: String::new(),
        extracted_choice: Some("A".into()),
        correct: Some(correct),
        judge_score: None,
        detected_reasoning_language: None,
        pathway_used: pathway,
    }
}

fn main() {
    let think_en = Pathway::think_in("en").unwrap();
    let think_id = Pathway::think_in("id").unwrap();

    // The base model answers everything directly; the tuned model routes.
    let base = vec![
        record("q1", false, Some(Pathway::Direct)),
        record("q2", true, Some(Pathway::Direct)),
        record("q3", false, Some(Pathway::Direct)),
        record("q4", true, Some(Pathway::Direct)),
    ];
    let tuned = vec![
        record("q1", true, Some(think_en.clone())),  // fixed via English
        record("q2", true, Some(Pathway::Direct)),   // still right
        record("q3", false, Some(think_id.clone())), // still wrong
        record("q4", false, Some(think_en.clone())), // broken via English
    ];

    println!("tuned routing distribution:");
    for (pathway, count) in routing_distribution(&tuned) {
        println!("  {pathway:<9} {count}");
    }

    let analysis = transition_analysis(&base, &tuned).unwrap();
    println!("\ntransitions by tuned pathway:");
    for (pathway, counts) in &analysis.per_pathway {
        let name = pathway.as_ref().map(Pathway::to_string).unwrap_or_else(|| "unattributed".into());
        println!(
            "  {name:<12} beneficial={} detrimental={} unchanged_correct={} unchanged_incorrect={}",
            counts.beneficial, counts.detrimental, counts.unchanged_correct, counts.unchanged_incorrect
        );
    }
    println!("\ntotals partition the records: {} of {}", analysis.totals.total(), tuned.len());
}
