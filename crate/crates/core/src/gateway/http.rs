use std::time::Duration;

use reqwest::blocking::Client;
use reqwest::header::RETRY_AFTER;
use reqwest::StatusCode;
use serde_json::Value;

use super::{BackendError, ChatBackend, ChatRequest, ModelSpec};

/// OpenAI-compatible `POST <endpoint>/chat/completions`.
#[derive(Debug, Clone)]
pub struct HttpBackend {
    client: Client,
}

impl HttpBackend {
    pub fn new(timeout: Duration) -> Result<Self, BackendError> {
        let client = Client::builder().timeout(timeout).build().map_err(|e| BackendError::Transport {
            message: e.to_string(),
            retryable: false,
        })?;
        Ok(HttpBackend { client })
    }
}

/// The assistant text of a chat-completions response body.
pub(crate) fn extract_content(body: &str) -> Result<String, BackendError> {
    let v: Value = serde_json::from_str(body).map_err(|e| BackendError::Malformed(e.to_string()))?;
    v.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| BackendError::Malformed("no choices[0].message.content".into()))
}

fn retry_after(headers: &reqwest::header::HeaderMap) -> Option<Duration> {
    let v = headers.get(RETRY_AFTER)?.to_str().ok()?;
    v.trim().parse::<f64>().ok().and_then(|s| Duration::try_from_secs_f64(s).ok())
}

impl ChatBackend for HttpBackend {
    fn send(&self, request: &ChatRequest, spec: &ModelSpec) -> Result<String, BackendError> {
        let url = format!("{}/chat/completions", spec.endpoint.trim_end_matches('/'));
        let mut builder = self.client.post(&url).json(request);
        if let Some(var) = &spec.auth {
            let key = std::env::var(var).map_err(|_| BackendError::Transport {
                message: format!("environment variable {var} is not set"),
                retryable: false,
            })?;
            builder = builder.bearer_auth(key);
        }
        let response = builder.send().map_err(|e| BackendError::Transport {
            message: e.to_string(),
            retryable: true,
        })?;
        let status = response.status();
        if status == StatusCode::TOO_MANY_REQUESTS {
            return Err(BackendError::RateLimited {
                retry_after: retry_after(response.headers()),
            });
        }
        if !status.is_success() {
            let body = response.text().unwrap_or_default();
            return Err(BackendError::Transport {
                message: format!("HTTP {status}: {}", body.chars().take(200).collect::<String>()),
                retryable: status.is_server_error() || status == StatusCode::REQUEST_TIMEOUT,
            });
        }
        let body = response.text().map_err(|e| BackendError::Transport {
            message: e.to_string(),
            retryable: true,
        })?;
        extract_content(&body)
    }
}
