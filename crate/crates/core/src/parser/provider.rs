//! Completion providers: the trait, the retry policy, and a reference
//! transport speaking a chat-completions-style HTTP JSON protocol.

use std::time::Duration;

use rand::Rng;
use serde_json::json;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProviderError {
    /// Timeouts, rate limiting and 5xx-class responses; retried.
    #[error("transient provider failure: {0}")]
    Transient(String),
    /// Everything else; not retried.
    #[error("provider failure: {0}")]
    Fatal(String),
}

/// A text-completion backend. `complete` is the single operation the
/// parser needs; transports are injectable through this trait.
pub trait Provider: Send + Sync {
    fn complete(&self, prompt: &str) -> Result<String, ProviderError>;
    /// Participates in the parse cache key so switching models
    /// invalidates cached parses.
    fn identity(&self) -> String;
}

/// Exponential backoff: attempt `n` sleeps `base·2^n` (capped) plus
/// uniform jitter in `[0, base)`.
#[derive(Debug, Clone)]
pub struct RetryPolicy {
    pub retries: u32,
    pub base: Duration,
    pub cap: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            retries: 5,
            base: Duration::from_secs(1),
            cap: Duration::from_secs(32),
        }
    }
}

impl RetryPolicy {
    /// Deterministic part of the delay for one attempt.
    pub fn backoff(&self, attempt: u32) -> Duration {
        let factor = 2u32.checked_pow(attempt).unwrap_or(u32::MAX);
        self.base.saturating_mul(factor).min(self.cap)
    }

    pub fn delay(&self, attempt: u32, rng: &mut impl Rng) -> Duration {
        let jitter_nanos = if self.base.is_zero() {
            0
        } else {
            rng.gen_range(0..self.base.as_nanos().max(1))
        };
        self.backoff(attempt) + Duration::from_nanos(jitter_nanos as u64)
    }
}

/// Reference transport: POSTs a chat-completions request (temperature 0,
/// JSON response format) and returns the first choice's content. The API
/// key is sent as a bearer token and never logged.
pub struct HttpProvider {
    agent: ureq::Agent,
    endpoint: String,
    model: String,
    api_key: Option<String>,
}

impl HttpProvider {
    pub fn new(endpoint: impl Into<String>, model: impl Into<String>, api_key: Option<String>) -> Self {
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_secs(120))
            .build();
        HttpProvider {
            agent,
            endpoint: endpoint.into(),
            model: model.into(),
            api_key,
        }
    }
}

impl Provider for HttpProvider {
    fn complete(&self, prompt: &str) -> Result<String, ProviderError> {
        let body = json!({
            "model": self.model,
            "temperature": 0,
            "response_format": {"type": "json_object"},
            "messages": [{"role": "user", "content": prompt}],
        });
        let mut request = self
            .agent
            .post(&self.endpoint)
            .set("Content-Type", "application/json");
        if let Some(key) = &self.api_key {
            request = request.set("Authorization", &format!("Bearer {key}"));
        }
        let response = match request.send_string(&body.to_string()) {
            Ok(r) => r,
            Err(ureq::Error::Status(code, _)) if code == 429 || code >= 500 => {
                return Err(ProviderError::Transient(format!("status {code}")))
            }
            Err(ureq::Error::Status(code, _)) => {
                return Err(ProviderError::Fatal(format!("status {code}")))
            }
            Err(ureq::Error::Transport(t)) => {
                return Err(ProviderError::Transient(t.to_string()))
            }
        };
        let value: serde_json::Value = response
            .into_json()
            .map_err(|e| ProviderError::Fatal(format!("unreadable response: {e}")))?;
        value
            .pointer("/choices/0/message/content")
            .and_then(|v| v.as_str())
            .map(str::to_string)
            .ok_or_else(|| ProviderError::Fatal("response carries no message content".into()))
    }

    fn identity(&self) -> String {
        self.model.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backoff_doubles_and_caps() {
        let policy = RetryPolicy {
            retries: 5,
            base: Duration::from_secs(1),
            cap: Duration::from_secs(32),
        };
        assert_eq!(policy.backoff(0), Duration::from_secs(1));
        assert_eq!(policy.backoff(1), Duration::from_secs(2));
        assert_eq!(policy.backoff(4), Duration::from_secs(16));
        assert_eq!(policy.backoff(5), Duration::from_secs(32));
        assert_eq!(policy.backoff(9), Duration::from_secs(32), "cap holds");
    }

    #[test]
    fn expected_delay_is_non_decreasing() {
        // jitter is uniform in [0, base): the expectation of attempt n is
        // backoff(n) + base/2, so monotonicity of backoff gives
        // monotonicity of the expectation
        let policy = RetryPolicy::default();
        let mut previous = Duration::ZERO;
        for attempt in 0..12 {
            let current = policy.backoff(attempt);
            assert!(current >= previous);
            previous = current;
        }
    }

    #[test]
    fn jitter_stays_below_base() {
        let policy = RetryPolicy {
            retries: 3,
            base: Duration::from_millis(10),
            cap: Duration::from_millis(80),
        };
        let mut rng = rand::thread_rng();
        for attempt in 0..4 {
            for _ in 0..200 {
                let d = policy.delay(attempt, &mut rng);
                assert!(d >= policy.backoff(attempt));
                assert!(d < policy.backoff(attempt) + policy.base);
            }
        }
    }
}
