use std::collections::HashMap;
use std::sync::Mutex;
use std::time::Duration;

use super::{BackendError, ChatBackend, ChatRequest, ModelSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    Transport,
    RateLimited,
    Malformed,
}

impl FailureKind {
    fn error(self) -> BackendError {
        match self {
            FailureKind::Transport => BackendError::Transport {
                message: "scripted failure".into(),
                retryable: true,
            },
            FailureKind::RateLimited => BackendError::RateLimited { retry_after: None },
            FailureKind::Malformed => BackendError::Malformed("scripted failure".into()),
        }
    }
}

/// In-process backend answering from a fingerprint → text script.
///
/// Failures are scheduled per (model, fingerprint), so the outcome of a
/// request does not depend on how requests interleave across threads.
#[derive(Debug, Default)]
pub struct MockBackend {
    script: HashMap<String, String>,
    default_text: String,
    fail_first: usize,
    always_fail: bool,
    failure: Option<FailureKind>,
    latency: Duration,
    attempts: Mutex<HashMap<(String, String), usize>>,
    recorded: Mutex<Vec<ChatRequest>>,
}

impl MockBackend {
    pub fn new(default_text: impl Into<String>) -> Self {
        MockBackend {
            default_text: default_text.into(),
            ..Default::default()
        }
    }

    pub fn with_script(script: HashMap<String, String>, default_text: impl Into<String>) -> Self {
        MockBackend {
            script,
            ..Self::new(default_text)
        }
    }

    /// The first `n` attempts for every (model, prompt) pair fail with `kind`.
    pub fn failing_first(mut self, n: usize, kind: FailureKind) -> Self {
        self.fail_first = n;
        self.failure = Some(kind);
        self
    }

    pub fn always_failing(mut self, kind: FailureKind) -> Self {
        self.always_fail = true;
        self.failure = Some(kind);
        self
    }

    pub fn with_latency(mut self, latency: Duration) -> Self {
        self.latency = latency;
        self
    }

    /// Every request received, in arrival order.
    pub fn recorded(&self) -> Vec<ChatRequest> {
        self.recorded.lock().expect("mock poisoned").clone()
    }
}

impl ChatBackend for MockBackend {
    fn send(&self, request: &ChatRequest, _spec: &ModelSpec) -> Result<String, BackendError> {
        self.recorded.lock().expect("mock poisoned").push(request.clone());
        if !self.latency.is_zero() {
            std::thread::sleep(self.latency);
        }
        let fingerprint = request.fingerprint();
        let seen = {
            let mut attempts = self.attempts.lock().expect("mock poisoned");
            let n = attempts.entry((request.model.clone(), fingerprint.clone())).or_insert(0);
            *n += 1;
            *n
        };
        if let Some(kind) = self.failure {
            if self.always_fail || seen <= self.fail_first {
                return Err(kind.error());
            }
        }
        Ok(self.script.get(&fingerprint).unwrap_or(&self.default_text).clone())
    }
}
