use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use mtsem_backend::{BackendError, CompletionBackend, CompletionRequest, HttpBackend, HttpConfig};

struct Captured {
    path: String,
    authorization: Option<String>,
    body: serde_json::Value,
}

/// A one-request-per-connection HTTP server replaying `responses` in order.
fn stub(responses: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<Captured>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap();
    let captured = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&captured);
    thread::spawn(move || {
        for (status, body) in responses {
            let (stream, _) = listener.accept().unwrap();
            log.lock().unwrap().push(serve(stream, status, &body));
        }
    });
    (format!("http://{addr}"), captured)
}

fn serve(stream: TcpStream, status: u16, body: &str) -> Captured {
    let mut reader = BufReader::new(stream.try_clone().unwrap());
    let mut line = String::new();
    reader.read_line(&mut line).unwrap();
    let path = line
        .split_whitespace()
        .nth(1)
        .unwrap_or_default()
        .to_string();
    let (mut len, mut authorization) = (0, None);
    loop {
        line.clear();
        reader.read_line(&mut line).unwrap();
        let header = line.trim_end();
        if header.is_empty() {
            break;
        }
        let (name, value) = header.split_once(':').unwrap();
        match name.to_ascii_lowercase().as_str() {
            "content-length" => len = value.trim().parse().unwrap(),
            "authorization" => authorization = Some(value.trim().to_string()),
            _ => {}
        }
    }
    let mut raw = vec![0; len];
    reader.read_exact(&mut raw).unwrap();
    let mut stream = stream;
    write!(
        stream,
        "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    )
    .unwrap();
    Captured {
        path,
        authorization,
        body: serde_json::from_slice(&raw).unwrap(),
    }
}

fn envelope(content: &str) -> String {
    serde_json::json!({
        "choices": [{"index": 0, "message": {"role": "assistant", "content": content}}],
        "usage": {"prompt_tokens": 10, "completion_tokens": 2}
    })
    .to_string()
}

fn backend(base: &str) -> HttpBackend {
    let mut cfg = HttpConfig::new(base);
    cfg.api_key = Some("sk-test".into());
    cfg.initial_backoff = Duration::from_millis(5);
    HttpBackend::new(cfg).unwrap()
}

#[test]
fn extracts_first_choice_content() {
    let (base, seen) = stub(vec![(200, envelope("[1, 2]"))]);
    let mut req = CompletionRequest::new("the prompt", "gpt-test");
    req.max_tokens = 64;
    let out = backend(&base).complete(&req).unwrap();
    assert_eq!(out.text, "[1, 2]");
    assert_eq!(out.attempts, 1);
    assert_eq!(out.usage.unwrap().completion_tokens, 2);

    let seen = seen.lock().unwrap();
    assert_eq!(seen[0].path, "/v1/chat/completions");
    assert_eq!(seen[0].authorization.as_deref(), Some("Bearer sk-test"));
    assert_eq!(
        seen[0].body,
        serde_json::json!({
            "model": "gpt-test",
            "messages": [{"role": "user", "content": "the prompt"}],
            "temperature": 0.0,
            "max_tokens": 64
        })
    );
}

#[test]
fn retries_429_then_succeeds() {
    let (base, seen) = stub(vec![
        (429, "{}".into()),
        (429, "{}".into()),
        (200, envelope("ok")),
    ]);
    let out = backend(&base)
        .complete(&CompletionRequest::new("p", "m"))
        .unwrap();
    assert_eq!(out.text, "ok");
    assert_eq!(out.attempts, 3);
    assert_eq!(seen.lock().unwrap().len(), 3);
}

#[test]
fn gives_up_after_max_attempts() {
    let (base, _) = stub(vec![
        (503, "busy".into()),
        (502, "bad gateway".into()),
        (500, "still down".into()),
    ]);
    match backend(&base).complete(&CompletionRequest::new("p", "m")) {
        Err(BackendError::Status {
            status,
            body,
            attempts,
        }) => {
            assert_eq!((status, attempts), (500, 3));
            assert_eq!(body, "still down");
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn client_errors_are_not_retried() {
    let (base, seen) = stub(vec![(401, r#"{"error":"bad key"}"#.into())]);
    let err = backend(&base)
        .complete(&CompletionRequest::new("p", "m"))
        .unwrap_err();
    assert!(matches!(
        err,
        BackendError::Status {
            status: 401,
            attempts: 1,
            ..
        }
    ));
    assert_eq!(seen.lock().unwrap().len(), 1);
}

#[test]
fn invalid_json_is_malformed_without_retry() {
    let (base, seen) = stub(vec![(200, "not json".into()), (200, envelope("late"))]);
    let err = backend(&base)
        .complete(&CompletionRequest::new("p", "m"))
        .unwrap_err();
    assert!(matches!(err, BackendError::Malformed(_)), "{err}");
    assert_eq!(seen.lock().unwrap().len(), 1);
}

#[test]
fn slow_server_times_out() {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    thread::spawn(move || {
        let (_s, _) = listener.accept().unwrap();
        thread::sleep(Duration::from_secs(3));
    });
    let mut req = CompletionRequest::new("p", "m");
    req.timeout = Duration::from_millis(200);
    let err = backend(&base).complete(&req).unwrap_err();
    assert!(matches!(err, BackendError::Timeout(_)), "{err}");
}

#[test]
fn unreachable_server_is_transport_failure() {
    let port = TcpListener::bind("127.0.0.1:0")
        .unwrap()
        .local_addr()
        .unwrap()
        .port();
    let err = backend(&format!("http://127.0.0.1:{port}"))
        .complete(&CompletionRequest::new("p", "m"))
        .unwrap_err();
    assert!(matches!(err, BackendError::Transport(_)), "{err}");
}

#[test]
fn invalid_request_never_reaches_the_wire() {
    let mut req = CompletionRequest::new("p", "m");
    req.temperature = 3.0;
    let err = backend("http://127.0.0.1:9").complete(&req).unwrap_err();
    assert!(matches!(err, BackendError::InvalidRequest(_)));
}

#[test]
fn backends_are_shareable_across_threads() {
    let mock = Arc::new(mtsem_backend::MockBackend::echo("7"));
    let handles: Vec<_> = (0..8)
        .map(|i| {
            let m = Arc::clone(&mock);
            thread::spawn(move || {
                m.complete(&CompletionRequest::new(format!("p{i}"), "m"))
                    .unwrap()
                    .text
            })
        })
        .collect();
    for h in handles {
        assert_eq!(h.join().unwrap(), "7");
    }
    assert_eq!(mock.recorded().len(), 8);
}
