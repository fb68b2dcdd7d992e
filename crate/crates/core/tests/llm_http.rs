mod common;

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::thread;
use std::time::Duration;

use common::fixtures;
use goalrec::eval::load_bundle;
use goalrec::recognizer_llm::{
    recognize_llm, ChatClient, ChatRequest, ClientError, HttpClient, ProviderConfig, ProviderSet, RecordingClient,
    ReplayClient,
};
use goalrec::result::ParseStatus;
use serde_json::{json, Value};

struct Seen {
    authorization: Option<String>,
    body: Value,
}

/// Serves the scripted `(status, body)` replies in order, one connection each.
fn serve(script: Vec<(u16, String)>) -> (String, Arc<Mutex<Vec<Seen>>>) {
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let url = format!("http://{}/v1/chat/completions", listener.local_addr().unwrap());
    let seen = Arc::new(Mutex::new(Vec::new()));
    let log = Arc::clone(&seen);
    thread::spawn(move || {
        for (status, body) in script {
            let Ok((stream, _)) = listener.accept() else { return };
            let mut reader = BufReader::new(stream.try_clone().unwrap());
            let mut authorization = None;
            let mut length = 0;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                let line = line.trim_end();
                if line.is_empty() {
                    break;
                }
                if let Some((k, v)) = line.split_once(':') {
                    match k.to_ascii_lowercase().as_str() {
                        "authorization" => authorization = Some(v.trim().to_string()),
                        "content-length" => length = v.trim().parse().unwrap(),
                        _ => {}
                    }
                }
            }
            let mut buf = vec![0; length];
            reader.read_exact(&mut buf).unwrap();
            log.lock().unwrap().push(Seen {
                authorization,
                body: serde_json::from_slice(&buf).unwrap_or(Value::Null),
            });
            let mut stream = stream;
            write!(
                stream,
                "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
                body.len()
            )
            .unwrap();
        }
    });
    (url, seen)
}

fn completion(content: &str) -> String {
    json!({
        "choices": [{"message": {"role": "assistant", "content": content}}],
        "usage": {"prompt_tokens": 120, "completion_tokens": 30, "total_tokens": 150}
    })
    .to_string()
}

fn provider(url: &str, key_env: Option<&str>) -> ProviderConfig {
    let key = key_env.map_or(String::new(), |k| format!("api_key_env = \"{k}\"\n"));
    let text = format!(
        "[p]\nendpoint = \"{url}\"\nmodel = \"m-1\"\n{key}max_attempts = 3\ntimeout_secs = 5\nprice_in = 1.0\nprice_out = 2.0\n"
    );
    ProviderSet::parse(&text, false).unwrap().get("p").unwrap().clone()
}

fn client(p: &ProviderConfig) -> HttpClient {
    HttpClient::new(p).unwrap().with_backoff(Duration::from_millis(5))
}

#[test]
fn retries_server_errors_then_succeeds() {
    let (url, seen) = serve(vec![
        (500, "{}".into()),
        (429, "{}".into()),
        (200, completion("Hyps:\n")),
    ]);
    let p = provider(&url, None);
    let r = client(&p).complete(&ChatRequest::new(&p, "hello".into())).unwrap();
    assert_eq!(r.content, "Hyps:\n");
    assert_eq!(r.usage.unwrap().total(), 150);
    let seen = seen.lock().unwrap();
    assert_eq!(seen.len(), 3);
    assert_eq!(seen[0].body, seen[2].body);
    assert_eq!(seen[0].body["model"], "m-1");
    assert_eq!(seen[0].body["messages"][0]["content"], "hello");
}

#[test]
fn gives_up_after_max_attempts() {
    let (url, seen) = serve(vec![(503, "{}".into()), (502, "{}".into()), (500, "{}".into()), (200, completion("late"))]);
    let p = provider(&url, None);
    let e = client(&p).complete(&ChatRequest::new(&p, "x".into())).unwrap_err();
    assert!(matches!(e, ClientError::Transport { attempts: 3, .. }), "{e}");
    assert_eq!(seen.lock().unwrap().len(), 3);
}

#[test]
fn client_errors_are_not_retried() {
    let (url, seen) = serve(vec![(400, "{\"error\":\"bad\"}".into()), (200, completion("never"))]);
    let p = provider(&url, None);
    let e = client(&p).complete(&ChatRequest::new(&p, "x".into())).unwrap_err();
    assert!(matches!(e, ClientError::Status(400)));
    assert_eq!(seen.lock().unwrap().len(), 1);
}

#[test]
fn garbage_content_is_not_retried() {
    let (url, seen) = serve(vec![(200, completion("[:answer A]")), (200, completion("never"))]);
    let p = provider(&url, None);
    let r = client(&p).complete(&ChatRequest::new(&p, "x".into())).unwrap();
    assert_eq!(r.content, "[:answer A]");
    assert_eq!(seen.lock().unwrap().len(), 1);
}

#[test]
fn malformed_body_is_an_error() {
    let (url, _) = serve(vec![(200, "{\"choices\":[]}".into())]);
    let p = provider(&url, None);
    let e = client(&p).complete(&ChatRequest::new(&p, "x".into())).unwrap_err();
    assert!(matches!(e, ClientError::Malformed(_)));
}

#[test]
fn sends_bearer_key_from_environment() {
    let var = "GOALREC_TEST_HTTP_KEY";
    std::env::set_var(var, "sk-test-123");
    let (url, seen) = serve(vec![(200, completion("ok"))]);
    let p = provider(&url, Some(var));
    client(&p).complete(&ChatRequest::new(&p, "x".into())).unwrap();
    assert_eq!(seen.lock().unwrap()[0].authorization.as_deref(), Some("Bearer sk-test-123"));
}

#[test]
fn missing_key_variable_is_reported() {
    let p = provider("http://127.0.0.1:9/", Some("GOALREC_TEST_UNSET_KEY"));
    assert!(matches!(HttpClient::new(&p), Err(ClientError::MissingKey(v)) if v == "GOALREC_TEST_UNSET_KEY"));
}

#[test]
fn connection_refused_is_retried_and_reported() {
    let port = TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port();
    let p = provider(&format!("http://127.0.0.1:{port}/v1"), None);
    let e = client(&p).complete(&ChatRequest::new(&p, "x".into())).unwrap_err();
    assert!(matches!(e, ClientError::Transport { attempts: 3, .. }), "{e}");
}

#[test]
fn record_then_replay_end_to_end() {
    let bundle = load_bundle(&fixtures().join("llm/bundle")).unwrap();
    let reply = std::fs::read_to_string(fixtures().join("llm/responses/single_goal.txt")).unwrap();
    let (url, seen) = serve(vec![(200, completion(&reply))]);
    let p = provider(&url, None);
    let dir = tempfile::tempdir().unwrap();

    let recording = RecordingClient::new(client(&p), dir.path()).unwrap();
    let live = recognize_llm(&bundle, &p, &recording);
    assert_eq!(live.parse_status, Some(ParseStatus::Ok));
    assert_eq!(live.predicted.len(), 1);
    assert_eq!(live.recognizer, "llm:p");
    assert!((live.cost.unwrap() - (120.0 * 1.0 + 30.0 * 2.0) / 1e6).abs() < 1e-15);
    assert_eq!(seen.lock().unwrap()[0].body["messages"][0]["content"], build(&bundle));

    let replayed = recognize_llm(&bundle, &p, &ReplayClient::new(dir.path()));
    assert_eq!(replayed.predicted, live.predicted);
    assert_eq!(replayed.usage, live.usage);
    assert_eq!(replayed.wall_time, live.wall_time);
    assert_eq!(seen.lock().unwrap().len(), 1);
}

fn build(b: &goalrec::bundle::RecognitionBundle) -> String {
    goalrec::recognizer_llm::build_prompt(b).prompt
}
