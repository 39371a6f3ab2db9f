//! Live transport: OpenAI-compatible chat-completion endpoints.
//!
//! POSTs `{model, messages, temperature}` as JSON with a bearer token and
//! extracts the first choice's message content. Status classification:
//! 429 and 5xx are retryable, 401/403 are auth failures, other 4xx are
//! fatal; timeouts and connection errors are retryable.

use std::time::Duration;

use async_trait::async_trait;
use serde::Serialize;

use super::{CallFailure, ChatMessage, ChatRequest, ProfileDriver};

#[derive(Serialize)]
struct ChatCompletionBody<'a> {
    model: &'a str,
    messages: &'a [ChatMessage],
    temperature: f64,
}

pub struct HttpDriver {
    client: reqwest::Client,
    endpoint_url: String,
    model_name: String,
    timeout: Duration,
}

impl HttpDriver {
    pub fn new(endpoint_url: String, model_name: String, timeout: Duration) -> Self {
        Self {
            client: reqwest::Client::new(),
            endpoint_url,
            model_name,
            timeout,
        }
    }
}

/// Pull the first choice's message content out of a chat-completion reply.
pub fn parse_chat_completion(body: &str) -> Result<String, String> {
    let value: serde_json::Value =
        serde_json::from_str(body).map_err(|e| format!("response is not JSON: {e}"))?;
    value
        .pointer("/choices/0/message/content")
        .and_then(|v| v.as_str())
        .map(str::to_string)
        .ok_or_else(|| "response has no choices[0].message.content string".to_string())
}

#[async_trait]
impl ProfileDriver for HttpDriver {
    async fn call(&self, request: &ChatRequest, auth: Option<&str>) -> Result<String, CallFailure> {
        let body = ChatCompletionBody {
            model: &self.model_name,
            messages: &request.messages,
            temperature: request.temperature,
        };
        let mut builder = self
            .client
            .post(&self.endpoint_url)
            .timeout(self.timeout)
            .json(&body);
        if let Some(token) = auth {
            builder = builder.bearer_auth(token);
        }

        let response = match builder.send().await {
            Ok(r) => r,
            Err(e) if e.is_timeout() => {
                return Err(CallFailure::Retryable(format!("timeout: {e}")));
            }
            Err(e) => return Err(CallFailure::Retryable(format!("connection: {e}"))),
        };

        let status = response.status();
        let text = response
            .text()
            .await
            .map_err(|e| CallFailure::Retryable(format!("body read: {e}")))?;

        if status.is_success() {
            return parse_chat_completion(&text).map_err(CallFailure::Malformed);
        }
        let summary = format!("HTTP {}: {}", status.as_u16(), text.chars().take(200).collect::<String>());
        match status.as_u16() {
            401 | 403 => Err(CallFailure::Auth(summary)),
            429 => Err(CallFailure::Retryable(summary)),
            500..=599 => Err(CallFailure::Retryable(summary)),
            _ => Err(CallFailure::Fatal(summary)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_first_choice_content() {
        let body = r#"{"choices":[{"message":{"role":"assistant","content":"hello"}}]}"#;
        assert_eq!(parse_chat_completion(body).unwrap(), "hello");
    }

    #[test]
    fn rejects_non_json_and_missing_fields() {
        assert!(parse_chat_completion("not json").is_err());
        assert!(parse_chat_completion(r#"{"choices":[]}"#).is_err());
        assert!(parse_chat_completion(r#"{"choices":[{"message":{}}]}"#).is_err());
        assert!(parse_chat_completion(r#"{"choices":[{"message":{"content":5}}]}"#).is_err());
    }

    #[test]
    fn body_serializes_in_wire_shape() {
        let messages = vec![ChatMessage::user("hi")];
        let body = ChatCompletionBody { model: "m", messages: &messages, temperature: 0.5 };
        let json = serde_json::to_value(&body).unwrap();
        assert_eq!(
            json,
            serde_json::json!({
                "model": "m",
                "messages": [{"role": "user", "content": "hi"}],
                "temperature": 0.5
            })
        );
    }
}
