//! Chat-completion access with retries, an in-flight limit and an offline
//! mock.

mod http;
mod limit;
mod mock;

pub use http::HttpBackend;
pub use limit::Limiter;
pub use mock::{FailureKind, MockBackend};

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::prompt::RenderedPrompt;

pub const DEFAULT_TEMPERATURE: f64 = 0.0;
pub const DEFAULT_MAX_OUTPUT_TOKENS: u32 = 1024;
pub const DEFAULT_IN_FLIGHT: usize = 4;
/// Longest server-requested wait that is honored.
const MAX_RETRY_AFTER: Duration = Duration::from_secs(300);

fn default_temperature() -> f64 {
    DEFAULT_TEMPERATURE
}

fn default_max_tokens() -> u32 {
    DEFAULT_MAX_OUTPUT_TOKENS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    /// Provider-qualified id, e.g. `google/gemma-3-12b-it`.
    pub model_id: String,
    #[serde(default = "default_temperature")]
    pub temperature: f64,
    #[serde(default = "default_max_tokens")]
    pub max_output_tokens: u32,
    #[serde(default)]
    pub endpoint: String,
    /// Name of the environment variable holding the API key.
    #[serde(default)]
    pub auth: Option<String>,
    /// Extra cap on concurrent requests for this model.
    #[serde(default)]
    pub max_in_flight: Option<usize>,
}

impl ModelSpec {
    pub fn new(model_id: impl Into<String>) -> Self {
        ModelSpec {
            model_id: model_id.into(),
            temperature: DEFAULT_TEMPERATURE,
            max_output_tokens: DEFAULT_MAX_OUTPUT_TOKENS,
            endpoint: String::new(),
            auth: None,
            max_in_flight: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum CompletionStatus {
    Ok,
    TransportError,
    RateLimited,
    MalformedReply,
}

impl fmt::Display for CompletionStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CompletionStatus::Ok => "OK",
            CompletionStatus::TransportError => "TRANSPORT_ERROR",
            CompletionStatus::RateLimited => "RATE_LIMITED",
            CompletionStatus::MalformedReply => "MALFORMED_REPLY",
        })
    }
}

/// Outcome of one `complete` call. `raw_text` is non-empty iff `status` is OK.
#[derive(Debug, Clone, PartialEq)]
pub struct CompletionResult {
    pub raw_text: String,
    pub status: CompletionStatus,
    pub latency: Duration,
    pub attempt_count: u32,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

/// Chat-completions request body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub max_tokens: u32,
}

impl ChatRequest {
    pub fn new(prompt: &RenderedPrompt, spec: &ModelSpec) -> Self {
        ChatRequest {
            model: spec.model_id.clone(),
            messages: vec![
                ChatMessage {
                    role: "system".into(),
                    content: prompt.system.clone(),
                },
                ChatMessage {
                    role: "user".into(),
                    content: prompt.user.clone(),
                },
            ],
            temperature: spec.temperature,
            max_tokens: spec.max_output_tokens,
        }
    }

    fn content(&self, role: &str) -> &str {
        self.messages
            .iter()
            .find(|m| m.role == role)
            .map(|m| m.content.as_str())
            .unwrap_or("")
    }

    /// Same hash as [`RenderedPrompt::fingerprint`].
    pub fn fingerprint(&self) -> String {
        crate::text::sha256_hex(&[self.content("system"), self.content("user")])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BackendError {
    Transport { message: String, retryable: bool },
    RateLimited { retry_after: Option<Duration> },
    Malformed(String),
}

impl fmt::Display for BackendError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BackendError::Transport { message, .. } => write!(f, "transport: {message}"),
            BackendError::RateLimited { retry_after: Some(d) } => {
                write!(f, "rate limited (retry after {}s)", d.as_secs_f64())
            }
            BackendError::RateLimited { retry_after: None } => f.write_str("rate limited"),
            BackendError::Malformed(m) => write!(f, "malformed reply: {m}"),
        }
    }
}

/// Something that answers one chat request with the assistant text.
pub trait ChatBackend: Send + Sync {
    fn send(&self, request: &ChatRequest, spec: &ModelSpec) -> Result<String, BackendError>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    pub max_attempts: u32,
    #[serde(with = "secs")]
    pub base_delay: Duration,
    pub factor: f64,
    #[serde(with = "secs")]
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_attempts: 5,
            base_delay: Duration::from_secs(1),
            factor: 2.0,
            max_delay: Duration::from_secs(30),
        }
    }
}

mod secs {
    use serde::{Deserialize, Deserializer, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(d.as_secs_f64())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        let v = f64::deserialize(d)?;
        Duration::try_from_secs_f64(v).map_err(serde::de::Error::custom)
    }
}

impl RetryPolicy {
    /// No waiting between attempts; for tests and mocks.
    pub fn immediate(max_attempts: u32) -> Self {
        RetryPolicy {
            max_attempts,
            base_delay: Duration::ZERO,
            factor: 1.0,
            max_delay: Duration::ZERO,
        }
    }

    /// Wait before attempt `attempt + 1`, where `attempt` counts from 1.
    pub fn backoff(&self, attempt: u32) -> Duration {
        let exp = self.factor.powi(attempt.saturating_sub(1).min(64) as i32);
        let secs = (self.base_delay.as_secs_f64() * exp).min(self.max_delay.as_secs_f64());
        Duration::try_from_secs_f64(secs).unwrap_or(self.max_delay)
    }

    fn wait(&self, attempt: u32, hint: Option<Duration>) -> Duration {
        match hint {
            Some(h) => h.min(MAX_RETRY_AFTER),
            None => self.backoff(attempt),
        }
    }
}

/// Shared entry point for completions. Cheap to share across threads.
pub struct Gateway {
    backend: Arc<dyn ChatBackend>,
    retry: RetryPolicy,
    global: Limiter,
    per_model: Mutex<HashMap<String, Arc<Limiter>>>,
    requests: AtomicU64,
    honor_retry_after: bool,
}

impl Gateway {
    pub fn new(backend: Arc<dyn ChatBackend>) -> Self {
        Gateway {
            backend,
            retry: RetryPolicy::default(),
            global: Limiter::new(DEFAULT_IN_FLIGHT),
            per_model: Mutex::new(HashMap::new()),
            requests: AtomicU64::new(0),
            honor_retry_after: true,
        }
    }

    pub fn with_retry(mut self, retry: RetryPolicy) -> Self {
        self.retry = retry;
        self
    }

    pub fn with_in_flight(mut self, limit: usize) -> Self {
        self.global = Limiter::new(limit);
        self
    }

    /// Ignore server retry-after hints and use the backoff schedule only.
    pub fn ignore_retry_after(mut self) -> Self {
        self.honor_retry_after = false;
        self
    }

    pub fn retry_policy(&self) -> &RetryPolicy {
        &self.retry
    }

    /// Attempts sent to the backend so far.
    pub fn request_count(&self) -> u64 {
        self.requests.load(Ordering::Relaxed)
    }

    /// Highest number of simultaneous requests observed.
    pub fn peak_in_flight(&self) -> usize {
        self.global.peak()
    }

    fn model_limiter(&self, spec: &ModelSpec) -> Option<Arc<Limiter>> {
        let limit = spec.max_in_flight?;
        let mut map = self.per_model.lock().expect("limiter map poisoned");
        Some(
            map.entry(spec.model_id.clone())
                .or_insert_with(|| Arc::new(Limiter::new(limit)))
                .clone(),
        )
    }

    pub fn complete(&self, prompt: &RenderedPrompt, spec: &ModelSpec) -> CompletionResult {
        self.complete_with(prompt, spec, &self.retry)
    }

    /// Send with retries. Failures come back as a non-OK result, never as a
    /// panic or error.
    pub fn complete_with(&self, prompt: &RenderedPrompt, spec: &ModelSpec, retry: &RetryPolicy) -> CompletionResult {
        let request = ChatRequest::new(prompt, spec);
        let started = Instant::now();
        let max_attempts = retry.max_attempts.max(1);
        let model_limiter = self.model_limiter(spec);
        let mut attempt = 0;
        loop {
            attempt += 1;
            let reply = {
                let _m = model_limiter.as_ref().map(|l| l.acquire());
                let _g = self.global.acquire();
                self.requests.fetch_add(1, Ordering::Relaxed);
                self.backend.send(&request, spec)
            };
            let failure = match reply {
                Ok(text) if !text.is_empty() => {
                    return CompletionResult {
                        raw_text: text,
                        status: CompletionStatus::Ok,
                        latency: started.elapsed(),
                        attempt_count: attempt,
                        error: None,
                    };
                }
                Ok(_) => BackendError::Malformed("empty assistant content".into()),
                Err(e) => e,
            };
            let (status, retryable, hint) = match &failure {
                BackendError::Transport { retryable, .. } => (CompletionStatus::TransportError, *retryable, None),
                BackendError::RateLimited { retry_after } => (CompletionStatus::RateLimited, true, *retry_after),
                BackendError::Malformed(_) => (CompletionStatus::MalformedReply, false, None),
            };
            if !retryable || attempt >= max_attempts {
                log::warn!("{}: giving up after {attempt} attempt(s): {failure}", spec.model_id);
                return CompletionResult {
                    raw_text: String::new(),
                    status,
                    latency: started.elapsed(),
                    attempt_count: attempt,
                    error: Some(failure.to_string()),
                };
            }
            let hint = if self.honor_retry_after { hint } else { None };
            let delay = retry.wait(attempt, hint);
            log::debug!("{}: attempt {attempt} failed ({failure}); retrying in {delay:?}", spec.model_id);
            if !delay.is_zero() {
                std::thread::sleep(delay);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prompt(user: &str) -> RenderedPrompt {
        RenderedPrompt::new("sys".into(), user.into())
    }

    fn gateway(mock: MockBackend, attempts: u32) -> (Gateway, Arc<MockBackend>) {
        let mock = Arc::new(mock);
        let gw = Gateway::new(mock.clone()).with_retry(RetryPolicy::immediate(attempts));
        (gw, mock)
    }

    #[test]
    fn echo_mock_ok_first_attempt() {
        let (gw, _) = gateway(MockBackend::new("FR_LOAN"), 5);
        let r = gw.complete(&prompt("x"), &ModelSpec::new("m"));
        assert_eq!(r.status, CompletionStatus::Ok);
        assert_eq!(r.raw_text, "FR_LOAN");
        assert_eq!(r.attempt_count, 1);
    }

    #[test]
    fn two_failures_then_success_with_three_attempts() {
        let (gw, _) = gateway(MockBackend::new("NATIVE").failing_first(2, FailureKind::Transport), 3);
        let r = gw.complete(&prompt("x"), &ModelSpec::new("m"));
        assert_eq!(r.status, CompletionStatus::Ok);
        assert_eq!(r.attempt_count, 3);
        assert_eq!(gw.request_count(), 3);
    }

    #[test]
    fn exhaustion_reports_status_not_error() {
        let (gw, _) = gateway(MockBackend::new("NATIVE").always_failing(FailureKind::Transport), 1);
        let r = gw.complete(&prompt("x"), &ModelSpec::new("m"));
        assert_eq!(r.status, CompletionStatus::TransportError);
        assert!(r.raw_text.is_empty());
        assert_eq!(r.attempt_count, 1);

        let (gw, _) = gateway(MockBackend::new("NATIVE").always_failing(FailureKind::RateLimited), 4);
        let r = gw.complete(&prompt("x"), &ModelSpec::new("m"));
        assert_eq!(r.status, CompletionStatus::RateLimited);
        assert_eq!(r.attempt_count, 4);

        let (gw, _) = gateway(MockBackend::new("NATIVE").always_failing(FailureKind::Malformed), 4);
        let r = gw.complete(&prompt("x"), &ModelSpec::new("m"));
        assert_eq!(r.status, CompletionStatus::MalformedReply);
        assert_eq!(r.attempt_count, 1);
    }

    #[test]
    fn empty_reply_is_malformed() {
        let (gw, _) = gateway(MockBackend::new(""), 3);
        let r = gw.complete(&prompt("x"), &ModelSpec::new("m"));
        assert_eq!(r.status, CompletionStatus::MalformedReply);
    }

    #[test]
    fn requests_carry_decoding_defaults() {
        let (gw, mock) = gateway(MockBackend::new("NATIVE"), 1);
        gw.complete(&prompt("hello"), &ModelSpec::new("google/gemma-3-12b-it"));
        let recorded = mock.recorded();
        assert_eq!(recorded.len(), 1);
        assert_eq!(recorded[0].temperature, 0.0);
        assert_eq!(recorded[0].max_tokens, 1024);
        assert_eq!(recorded[0].messages[0].role, "system");
        assert_eq!(recorded[0].messages[1].content, "hello");
        assert_eq!(recorded[0].fingerprint(), prompt("hello").fingerprint);
    }

    #[test]
    fn backoff_schedule() {
        let p = RetryPolicy::default();
        let secs: Vec<f64> = (1..=7).map(|a| p.backoff(a).as_secs_f64()).collect();
        assert_eq!(secs, vec![1.0, 2.0, 4.0, 8.0, 16.0, 30.0, 30.0]);
        assert_eq!(p.wait(1, Some(Duration::from_secs(7))), Duration::from_secs(7));
    }

    #[test]
    fn two_gateways_over_same_script_agree() {
        let mut script = HashMap::new();
        script.insert(prompt("a").fingerprint, "DE_LOAN".to_string());
        let run = || {
            let (gw, _) = gateway(MockBackend::with_script(script.clone(), "NATIVE"), 1);
            ["a", "b", "a"]
                .iter()
                .map(|u| gw.complete(&prompt(u), &ModelSpec::new("m")).raw_text)
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), vec!["DE_LOAN", "NATIVE", "DE_LOAN"]);
        assert_eq!(run(), run());
    }

    #[test]
    fn in_flight_limit_holds_under_threads() {
        let mock = Arc::new(MockBackend::new("NATIVE").with_latency(Duration::from_millis(5)));
        let gw = Arc::new(Gateway::new(mock).with_retry(RetryPolicy::immediate(1)).with_in_flight(2));
        std::thread::scope(|s| {
            for i in 0..8 {
                let gw = gw.clone();
                s.spawn(move || gw.complete(&prompt(&i.to_string()), &ModelSpec::new("m")));
            }
        });
        assert!(gw.peak_in_flight() <= 2);
        assert_eq!(gw.request_count(), 8);
    }
}
