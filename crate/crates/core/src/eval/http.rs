//! Chat-completion adapter over HTTP.
//!
//! Requests use the widely implemented chat-completions wire format:
//!
//! ```text
//! POST <endpoint>
//! Authorization: Bearer <value of $api_key_env>
//! {"model": ..., "messages": [{"role": "system", ...}, {"role": "user", ...}],
//!  "temperature": 1.0, "max_tokens": 4096, "top_p": 1.0,
//!  "frequency_penalty": 0.0, "presence_penalty": 0.0}
//! ```
//!
//! and read `choices[0].message.content` plus the optional `usage` block.
//! Connection failures, timeouts, 408, 429 and 5xx answers are retried with
//! exponential backoff; other HTTP errors fail immediately.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::adapter::{CompletionResult, GenerationConfig, ModelAdapter, TransportError};
use crate::encoding::Prompt;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    pub max_retries: u32,
    pub initial_backoff_ms: u64,
    /// Per-attempt limit covering connect, send and the full response.
    pub timeout_secs: f64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 3,
            initial_backoff_ms: 500,
            timeout_secs: 120.0,
        }
    }
}

impl RetryPolicy {
    fn backoff(&self, attempt: u32) -> Duration {
        Duration::from_millis(self.initial_backoff_ms.saturating_mul(1 << attempt.min(16)))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HttpChatConfig {
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the bearer token.
    pub api_key_env: String,
    pub generation: GenerationConfig,
    pub retry: RetryPolicy,
    pub single_flight: bool,
}

impl Default for HttpChatConfig {
    fn default() -> Self {
        HttpChatConfig {
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model: "gpt-4-1106-preview".into(),
            api_key_env: "SATPHASE_API_KEY".into(),
            generation: GenerationConfig::default(),
            retry: RetryPolicy::default(),
            single_flight: false,
        }
    }
}

pub struct HttpChatAdapter {
    config: HttpChatConfig,
    api_key: String,
    agent: ureq::Agent,
    name: String,
}

#[derive(Deserialize)]
struct ChatResponse {
    choices: Vec<Choice>,
    usage: Option<Usage>,
}

#[derive(Deserialize)]
struct Choice {
    message: Message,
}

#[derive(Deserialize)]
struct Message {
    content: Option<String>,
}

#[derive(Deserialize)]
struct Usage {
    prompt_tokens: u64,
    completion_tokens: u64,
}

enum Attempt {
    Done(CompletionResult),
    Retry(String),
    Fail(TransportError),
}

impl HttpChatAdapter {
    /// Reads the credential from the configured environment variable.
    /// Fails before any network activity when it is unset or empty.
    pub fn new(config: HttpChatConfig) -> Result<Self, TransportError> {
        let key = std::env::var(&config.api_key_env)
            .ok()
            .filter(|k| !k.trim().is_empty())
            .ok_or_else(|| TransportError::MissingCredential(config.api_key_env.clone()))?;
        Self::with_credential(config, key)
    }

    pub fn with_credential(config: HttpChatConfig, api_key: String) -> Result<Self, TransportError> {
        if config.endpoint.trim().is_empty() {
            return Err(TransportError::InvalidConfig("empty endpoint".into()));
        }
        if config.retry.timeout_secs.is_nan() || config.retry.timeout_secs <= 0.0 {
            return Err(TransportError::InvalidConfig("timeout must be positive".into()));
        }
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs_f64(config.retry.timeout_secs)))
            .http_status_as_error(false)
            .build()
            .new_agent();
        Ok(HttpChatAdapter {
            name: format!("http_chat({})", config.model),
            config,
            api_key,
            agent,
        })
    }

    fn attempt(&self, body: &serde_json::Value, prompt: &Prompt) -> Attempt {
        let start = Instant::now();
        let response = self
            .agent
            .post(&self.config.endpoint)
            .header("Authorization", &format!("Bearer {}", self.api_key))
            .send_json(body);
        let mut response = match response {
            Ok(r) => r,
            Err(ureq::Error::BadUri(e)) => return Attempt::Fail(TransportError::InvalidConfig(e)),
            Err(e) => return Attempt::Retry(e.to_string()),
        };
        let status = response.status().as_u16();
        let text = match response.body_mut().read_to_string() {
            Ok(t) => t,
            Err(e) => return Attempt::Retry(e.to_string()),
        };
        if status == 408 || status == 429 || status >= 500 {
            return Attempt::Retry(format!("HTTP {status}: {}", truncate(&text)));
        }
        if !(200..300).contains(&status) {
            return Attempt::Fail(TransportError::HttpStatus {
                status,
                body: truncate(&text),
            });
        }
        let latency = start.elapsed().as_secs_f64();
        let parsed: ChatResponse = match serde_json::from_str(&text) {
            Ok(p) => p,
            Err(e) => return Attempt::Fail(TransportError::InvalidResponse(e.to_string())),
        };
        let Some(content) = parsed.choices.into_iter().next().map(|c| c.message.content.unwrap_or_default()) else {
            return Attempt::Fail(TransportError::InvalidResponse("no choices".into()));
        };
        let estimate = |t: &str| t.split_whitespace().count() as u64;
        let (prompt_tokens, completion_tokens, tokens_approximate) = match parsed.usage {
            Some(u) => (u.prompt_tokens, u.completion_tokens, false),
            None => (estimate(&prompt.text()), estimate(&content), true),
        };
        Attempt::Done(CompletionResult {
            text: content,
            prompt_tokens,
            completion_tokens,
            tokens_approximate,
            latency,
        })
    }
}

fn truncate(text: &str) -> String {
    text.chars().take(500).collect()
}

impl ModelAdapter for HttpChatAdapter {
    fn name(&self) -> &str {
        &self.name
    }

    fn config(&self) -> GenerationConfig {
        self.config.generation
    }

    fn single_flight(&self) -> bool {
        self.config.single_flight
    }

    fn complete(&self, prompt: &Prompt) -> Result<CompletionResult, TransportError> {
        let g = &self.config.generation;
        let body = json!({
            "model": self.config.model,
            "messages": [
                {"role": "system", "content": prompt.system},
                {"role": "user", "content": prompt.user},
            ],
            "temperature": g.temperature,
            "max_tokens": g.max_tokens,
            "top_p": g.top_p,
            "frequency_penalty": g.frequency_penalty,
            "presence_penalty": g.presence_penalty,
        });
        let retry = &self.config.retry;
        let mut reason = String::new();
        for attempt in 0..=retry.max_retries {
            if attempt > 0 {
                std::thread::sleep(retry.backoff(attempt - 1));
            }
            match self.attempt(&body, prompt) {
                Attempt::Done(result) => return Ok(result),
                Attempt::Fail(e) => return Err(e),
                Attempt::Retry(r) => reason = r,
            }
        }
        Err(TransportError::EndpointUnreachable {
            attempts: retry.max_retries + 1,
            reason,
        })
    }
}
