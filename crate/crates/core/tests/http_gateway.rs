//! `HttpBackend` against a scripted local HTTP server.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use borrowbench::gateway::{CompletionStatus, Gateway, HttpBackend, ModelSpec, RetryPolicy};
use borrowbench::prompt::RenderedPrompt;

struct Seen {
    request_line: String,
    authorization: Option<String>,
    body: serde_json::Value,
}

/// Serves the canned `(status line, extra headers, body)` replies in order,
/// one per connection, and records what it was sent.
fn serve(replies: Vec<(&'static str, &'static str, String)>) -> (String, Arc<Mutex<Vec<Seen>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&seen);
    thread::spawn(move || {
        for (status, headers, body) in replies {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream);
            let mut request_line = String::new();
            reader.read_line(&mut request_line).unwrap();
            let (mut length, mut authorization) = (0, None);
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let line = line.trim_end();
                if line.is_empty() {
                    break;
                }
                let (name, value) = line.split_once(':').unwrap();
                match name.to_ascii_lowercase().as_str() {
                    "content-length" => length = value.trim().parse().unwrap(),
                    "authorization" => authorization = Some(value.trim().to_string()),
                    _ => {}
                }
            }
            let mut raw = vec![0; length];
            reader.read_exact(&mut raw).unwrap();
            log.lock().unwrap().push(Seen {
                request_line: request_line.trim_end().to_string(),
                authorization,
                body: serde_json::from_slice(&raw).unwrap(),
            });
            let reply = format!(
                "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n{headers}\r\n{body}",
                body.len()
            );
            reader.get_mut().write_all(reply.as_bytes()).unwrap();
        }
    });
    (format!("http://{addr}/v1"), seen)
}

fn completion(text: &str) -> String {
    serde_json::json!({"choices": [{"message": {"role": "assistant", "content": text}}]}).to_string()
}

fn prompt() -> RenderedPrompt {
    RenderedPrompt::new("system text".into(), "user text".into())
}

fn spec(endpoint: String) -> ModelSpec {
    let mut spec = ModelSpec::new("vendor/model:free");
    spec.endpoint = endpoint;
    spec
}

fn gateway() -> Gateway {
    Gateway::new(Arc::new(HttpBackend::new(Duration::from_secs(10)).unwrap())).with_retry(RetryPolicy::immediate(3))
}

#[test]
fn rate_limit_and_server_error_are_retried() {
    let (endpoint, seen) = serve(vec![
        ("429 Too Many Requests", "Retry-After: 0\r\n", "{}".into()),
        ("503 Service Unavailable", "", "busy".into()),
        ("200 OK", "", completion("FR_LOAN\nFrench -éieren.")),
    ]);
    std::env::set_var("BORROWBENCH_TEST_KEY", "sk-test");
    let mut spec = spec(endpoint);
    spec.auth = Some("BORROWBENCH_TEST_KEY".into());

    let result = gateway().complete(&prompt(), &spec);
    assert_eq!(result.status, CompletionStatus::Ok);
    assert_eq!(result.raw_text, "FR_LOAN\nFrench -éieren.");
    assert_eq!(result.attempt_count, 3);

    let seen = seen.lock().unwrap();
    assert_eq!(seen.len(), 3);
    let first = &seen[0];
    assert_eq!(first.request_line, "POST /v1/chat/completions HTTP/1.1");
    assert_eq!(first.authorization.as_deref(), Some("Bearer sk-test"));
    assert_eq!(first.body["model"], "vendor/model:free");
    assert_eq!(first.body["temperature"], 0.0);
    assert_eq!(first.body["max_tokens"], 1024);
    assert_eq!(first.body["messages"][0]["role"], "system");
    assert_eq!(first.body["messages"][1]["content"], "user text");
}

#[test]
fn client_error_is_final() {
    let (endpoint, seen) = serve(vec![("400 Bad Request", "", "{\"error\":\"bad model\"}".into())]);
    let result = gateway().complete(&prompt(), &spec(endpoint));
    assert_eq!(result.status, CompletionStatus::TransportError);
    assert_eq!(result.attempt_count, 1);
    assert!(result.raw_text.is_empty());
    assert!(result.error.unwrap().contains("400"));
    assert_eq!(seen.lock().unwrap().len(), 1);
}

#[test]
fn unexpected_body_is_malformed_and_not_retried() {
    let (endpoint, _) = serve(vec![("200 OK", "", "{\"choices\": []}".into())]);
    let result = gateway().complete(&prompt(), &spec(endpoint));
    assert_eq!(result.status, CompletionStatus::MalformedReply);
    assert_eq!(result.attempt_count, 1);
}

#[test]
fn exhausted_rate_limit_is_reported() {
    let limited = || ("429 Too Many Requests", "Retry-After: 0\r\n", "{}".to_string());
    let (endpoint, _) = serve(vec![limited(), limited(), limited()]);
    let result = gateway().complete(&prompt(), &spec(endpoint));
    assert_eq!(result.status, CompletionStatus::RateLimited);
    assert_eq!(result.attempt_count, 3);
}
