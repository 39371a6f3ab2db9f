//! Script the deterministic offline backend.
//!
//! ```bash
//! cargo run --example mock_backend
//! ```

use amct::backend::{ChatBackend, ChatClient, ChatRequest, Matcher, MockRule, MockScript};

#[tokio::main(flavor = "current_thread")]
async fn main() {
    let script = MockScript {
        seed: 7,
        rules: vec![
            MockRule {
                matcher: Matcher::Substring("2+2".into()),
                response_template: "4".into(),
            },
            MockRule {
                matcher: Matcher::Exact("ping".into()),
                response_template: "pong".into(),
            },
        ],
        // Unmatched requests resolve to a stable 64-bit hex digest of
        // (seed, message contents).
        fallback_template: "unscripted reply {digest}".into(),
    };
    let client = ChatClient::single_script_mock(script, &["generation"]);

    for text in ["what is 2+2?", "ping", "anything else"] {
        let request = ChatRequest::from_user_text("generation", text, 0.0, "demo");
        let completion = client.complete(&request).await.unwrap();
        println!("{text:>16} -> {}", completion.text);
    }

    // Re-running the same request yields the same bytes, which is what
    // makes whole pipeline runs reproducible offline.
    let request = ChatRequest::from_user_text("generation", "anything else", 0.0, "demo");
    let again = client.complete(&request).await.unwrap();
    println!("{:>16} -> {} (identical)", "anything else", again.text);
}
