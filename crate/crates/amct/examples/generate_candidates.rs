//! Generate the candidate pool for one prompt: a direct answer plus one
//! cross-lingual chain-of-thought route per auxiliary language.
//!
//! ```bash
//! cargo run --example generate_candidates
//! ```

use amct::backend::{ChatClient, Matcher, MockRule, MockScript};
use amct::genpath::PathwayGenerator;
use amct::{LanguageTag, PipelineConfig, Prompt, TaskKind};

#[tokio::main(flavor = "current_thread")]
async fn main() {
    let cfg = PipelineConfig::new(vec![
        LanguageTag::new("en").unwrap(),
        LanguageTag::new("zh").unwrap(),
        LanguageTag::new("id").unwrap(),
    ]);

    // A Malay prompt is outside theta, so all four pathways are produced:
    // direct, think:en, think:zh, think:id.
    let prompt = Prompt {
        id: "demo".into(),
        text: "Jalan tol mana di Singapura yang terpanjang?".into(),
        language: LanguageTag::new("ms").unwrap(),
        group_id: None,
        task_kind: TaskKind::OpenEnded,
        choices: None,
        gold: None,
    };

    let script = MockScript {
        seed: 1,
        rules: vec![
            MockRule {
                matcher: Matcher::Substring("Restate the following question in English".into()),
                response_template: "Which expressway in Singapore is the longest?".into(),
            },
            MockRule {
                matcher: Matcher::Substring("Which expressway in Singapore".into()),
                response_template:
                    "The Pan-Island Expressway (PIE) is the longest at about 44 km.".into(),
            },
            MockRule {
                matcher: Matcher::Substring("Draft answer:".into()),
                response_template:
                    "Jalan tol terpanjang di Singapura adalah Pan-Island Expressway (PIE).".into(),
            },
        ],
        fallback_template: "jawapan ringkas {digest}".into(),
    };
    let client = ChatClient::single_script_mock(script, &["generation", "integration"]);

    let generator = PathwayGenerator::new(&cfg, &client);
    let pool = generator.generate_candidates(&prompt).await.unwrap();
    println!("candidates for {:?}:", prompt.id);
    for candidate in &pool.candidates {
        println!("  {:<9} final: {}", candidate.pathway.to_string(), candidate.final_text);
        if let Some(reasoning) = &candidate.reasoning {
            println!("            via {} reasoning: {}", reasoning.language, reasoning.text);
        }
    }
    println!("failures: {}", pool.failures.len());
}
