use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use super::provider::ProviderConfig;
use crate::result::TokenUsage;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub temperature: f64,
    pub prompt: String,
}

impl ChatRequest {
    pub fn new(provider: &ProviderConfig, prompt: String) -> Self {
        ChatRequest {
            model: provider.model.clone(),
            temperature: provider.temperature,
            prompt,
        }
    }

    /// The OpenAI-style request body.
    pub fn body(&self) -> Value {
        json!({
            "model": self.model,
            "messages": [{"role": "user", "content": self.prompt}],
            "temperature": self.temperature,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatResponse {
    pub content: String,
    pub usage: Option<TokenUsage>,
    /// Round-trip seconds of the call that produced the content.
    pub latency: f64,
}

#[derive(Debug, Error)]
pub enum ClientError {
    #[error("environment variable {0} is not set")]
    MissingKey(String),
    #[error("transport error after {attempts} attempt(s): {msg}")]
    Transport { attempts: u32, msg: String },
    #[error("HTTP status {0}")]
    Status(u16),
    #[error("malformed provider response: {0}")]
    Malformed(String),
    #[error("no recorded response for request {0}")]
    ReplayMiss(String),
    #[error("transcript: {0}")]
    Transcript(String),
}

pub trait ChatClient: Send + Sync {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, ClientError>;
}

impl ChatClient for Box<dyn ChatClient> {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, ClientError> {
        self.as_ref().complete(request)
    }
}

/// Blocking chat-completion client. Transport failures, 429 and 5xx are
/// retried with exponential backoff; a response that arrives is never
/// retried, whatever its content.
pub struct HttpClient {
    agent: ureq::Agent,
    endpoint: String,
    api_key: Option<String>,
    max_attempts: u32,
    backoff: Duration,
}

impl HttpClient {
    pub fn new(provider: &ProviderConfig) -> Result<Self, ClientError> {
        let api_key = match &provider.api_key_env {
            Some(var) => Some(std::env::var(var).map_err(|_| ClientError::MissingKey(var.clone()))?),
            None => None,
        };
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(provider.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .into();
        Ok(HttpClient {
            agent,
            endpoint: provider.endpoint.clone(),
            api_key,
            max_attempts: provider.max_attempts,
            backoff: Duration::from_millis(500),
        })
    }

    pub fn with_backoff(mut self, base: Duration) -> Self {
        self.backoff = base;
        self
    }

    fn attempt(&self, body: &Value) -> Result<Value, (bool, ClientError)> {
        let mut req = self.agent.post(&self.endpoint);
        if let Some(key) = &self.api_key {
            req = req.header("Authorization", &format!("Bearer {key}"));
        }
        let mut resp = req.send_json(body).map_err(|e| (is_transient(&e), transport(1, e)))?;
        let status = resp.status().as_u16();
        if status == 429 || status >= 500 {
            return Err((true, ClientError::Status(status)));
        }
        if status >= 400 {
            return Err((false, ClientError::Status(status)));
        }
        resp.body_mut()
            .read_json::<Value>()
            .map_err(|e| (false, ClientError::Malformed(e.to_string())))
    }
}

fn transport(attempts: u32, e: impl ToString) -> ClientError {
    ClientError::Transport {
        attempts,
        msg: e.to_string(),
    }
}

fn is_transient(e: &ureq::Error) -> bool {
    matches!(
        e,
        ureq::Error::Io(_)
            | ureq::Error::Timeout(_)
            | ureq::Error::ConnectionFailed
            | ureq::Error::HostNotFound
            | ureq::Error::Protocol(_)
            | ureq::Error::BodyStalled
    )
}

/// Pulls content and usage out of an OpenAI-style completion.
pub fn decode_completion(v: &Value) -> Result<(String, Option<TokenUsage>), ClientError> {
    let content = v
        .pointer("/choices/0/message/content")
        .ok_or_else(|| ClientError::Malformed("no choices[0].message.content".into()))?;
    // A null content is an empty answer, which the parser scores as garbage.
    let content = content.as_str().unwrap_or("").to_string();
    let usage = v.get("usage").and_then(|u| {
        let pt = u.get("prompt_tokens")?.as_u64()?;
        let ct = u.get("completion_tokens")?.as_u64()?;
        Some(TokenUsage::new(pt, ct))
    });
    Ok((content, usage))
}

impl ChatClient for HttpClient {
    fn complete(&self, request: &ChatRequest) -> Result<ChatResponse, ClientError> {
        let body = request.body();
        let mut attempt = 0;
        loop {
            attempt += 1;
            let start = Instant::now();
            match self.attempt(&body) {
                Ok(v) => {
                    let latency = start.elapsed().as_secs_f64();
                    let (content, usage) = decode_completion(&v)?;
                    return Ok(ChatResponse {
                        content,
                        usage,
                        latency,
                    });
                }
                Err((true, e)) if attempt < self.max_attempts => {
                    let wait = self.backoff * 2u32.pow(attempt - 1);
                    log::warn!("attempt {attempt} failed ({e}), retrying in {wait:?}");
                    std::thread::sleep(wait);
                }
                Err((true, e)) => return Err(transport(attempt, e)),
                Err((false, e)) => return Err(e),
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode() {
        let v = json!({
            "choices": [{"message": {"role": "assistant", "content": "Hyps:"}}],
            "usage": {"prompt_tokens": 10, "completion_tokens": 5, "total_tokens": 15}
        });
        let (c, u) = decode_completion(&v).unwrap();
        assert_eq!(c, "Hyps:");
        let u = u.unwrap();
        assert_eq!((u.prompt(), u.completion(), u.total()), (10, 5, 15));
        let null = json!({"choices": [{"message": {"content": null}}]});
        assert_eq!(decode_completion(&null).unwrap(), (String::new(), None));
        assert!(decode_completion(&json!({})).is_err());
    }

    #[test]
    fn missing_key() {
        let p = ProviderConfig {
            name: "x".into(),
            endpoint: "http://127.0.0.1:9".into(),
            model: "m".into(),
            api_key_env: Some("GOALREC_TEST_UNSET_KEY".into()),
            timeout_secs: 1.0,
            max_attempts: 1,
            concurrency: 1,
            price_in: 0.0,
            price_out: 0.0,
            temperature: 0.0,
            reasoning_first: false,
        };
        assert!(matches!(HttpClient::new(&p), Err(ClientError::MissingKey(_))));
    }
}
