//! Evaluate raw model outputs: strip chain-of-thought, extract choices,
//! detect the reasoning language, and compute accuracy and cross-lingual
//! consistency.
//!
//! ```bash
//! cargo run --example evaluate_outputs
//! ```

use std::collections::BTreeMap;

use amct::eval::{
    accuracy, consistency, detect_language, deterministic_extract, infer_pathway,
    strip_reasoning, ConsistencyGroup, EvalRecord,
};
use amct::{Choice, LanguageTag, MarkerPair, Pathway};

fn lang(code: &str) -> LanguageTag {
    LanguageTag::new(code).unwrap()
}

fn main() {
    let markers = MarkerPair { reasoning: "<reason:zh>".into(), answer: "<answer>".into() };
    let raw = "<reason:zh> the complement of no heads is 1/4 so the answer is 3/4 <answer> B";

    let stripped = strip_reasoning(raw, &["<answer>".to_string()]);
    println!("stripped answer: {stripped:?}");

    let (pathway, detected) = infer_pathway(raw, &markers);
    println!("pathway: {:?}  (reasoning language: {:?})",
        pathway.as_ref().map(Pathway::to_string),
        detected.as_ref().map(LanguageTag::to_string));

    let choices = vec![
        Choice { label: "A".into(), text: "1/2".into() },
        Choice { label: "B".into(), text: "3/4".into() },
        Choice { label: "C".into(), text: "1/4".into() },
    ];
    println!("extracted: {:?}", deterministic_extract(&stripped, &choices));

    for text in ["这是中文推理", "the quick brown fox", "1234 !!"] {
        println!("detect_language({text:?}) = {:?}",
            detect_language(text).map(|l| l.to_string()));
    }

    // Accuracy over three graded records.
    let record = |id: &str, language: &str, correct: bool| EvalRecord {
        prompt_id: id.into(),
        group_id: None,
        language: lang(language),
        raw_output: String::new(),
        stripped_answer: String::new(),
        extracted_choice: Some("B".into()),
        correct: Some(correct),
        judge_score: None,
        detected_reasoning_language: None,
        pathway_used: None,
    };
    let records = vec![record("a", "en", true), record("b", "zh", true), record("c", "id", false)];
    println!("accuracy: {:.4}", accuracy(&records).unwrap());

    // Consistency: the fraction of parallel groups whose extracted choices
    // agree across every language, regardless of correctness.
    let group = |id: &str, choices: [(&str, &str); 3]| ConsistencyGroup {
        group_id: id.into(),
        choices: choices
            .iter()
            .map(|(l, c)| (lang(l), c.to_string()))
            .collect::<BTreeMap<_, _>>(),
    };
    let groups = vec![
        group("g1", [("en", "A"), ("zh", "A"), ("id", "A")]),
        group("g2", [("en", "A"), ("zh", "B"), ("id", "A")]),
    ];
    let languages = [lang("en"), lang("zh"), lang("id")];
    println!("consistency: {:.4}", consistency(&groups, &languages).unwrap());
}
