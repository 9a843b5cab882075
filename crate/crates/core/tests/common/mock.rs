//! A local HTTP provider speaking the /embed and /nli protocol with stub
//! semantics, plus knobs for injecting failures.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::thread;

use grade_uq::similarity::{NliPair, StubProvider};
use serde_json::{json, Value};

#[derive(Default)]
pub struct Behavior {
    /// Answer this many requests with HTTP 500 before serving normally.
    pub fail_first: usize,
    /// Drop the last result of every response.
    pub truncate: bool,
    pub max_batch: usize,
}

pub struct MockProvider {
    pub url: String,
    pub requests: Arc<AtomicUsize>,
    /// Largest batch seen, in items.
    pub largest_batch: Arc<AtomicUsize>,
    pub bodies: Arc<Mutex<Vec<Value>>>,
    server: Arc<tiny_http::Server>,
    handle: Option<thread::JoinHandle<()>>,
}

impl MockProvider {
    pub fn start(behavior: Behavior) -> Self {
        let server = Arc::new(tiny_http::Server::http("127.0.0.1:0").expect("bind mock provider"));
        let url = format!("http://{}", server.server_addr().to_ip().unwrap());
        let requests = Arc::new(AtomicUsize::new(0));
        let largest_batch = Arc::new(AtomicUsize::new(0));
        let bodies = Arc::new(Mutex::new(Vec::new()));
        let max_batch = if behavior.max_batch == 0 { usize::MAX } else { behavior.max_batch };
        let handle = {
            let (server, requests, largest_batch, bodies) =
                (server.clone(), requests.clone(), largest_batch.clone(), bodies.clone());
            thread::spawn(move || {
                let stub = StubProvider::default();
                for mut req in server.incoming_requests() {
                    let seen = requests.fetch_add(1, Ordering::SeqCst);
                    let mut raw = String::new();
                    let _ = req.as_reader().read_to_string(&mut raw);
                    let body: Value = serde_json::from_str(&raw).unwrap_or(Value::Null);
                    bodies.lock().unwrap().push(body.clone());
                    let (status, reply) = if seen < behavior.fail_first {
                        (500, json!({"error": "injected failure"}))
                    } else {
                        serve(&stub, req.url(), &body, max_batch, behavior.truncate, &largest_batch)
                    };
                    let header = tiny_http::Header::from_bytes("Content-Type", "application/json").unwrap();
                    let resp = tiny_http::Response::from_string(reply.to_string()).with_status_code(status).with_header(header);
                    let _ = req.respond(resp);
                }
            })
        };
        Self { url, requests, largest_batch, bodies, server, handle: Some(handle) }
    }

    pub fn request_count(&self) -> usize {
        self.requests.load(Ordering::SeqCst)
    }
}

impl Drop for MockProvider {
    fn drop(&mut self) {
        self.server.unblock();
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}

fn serve(stub: &StubProvider, route: &str, body: &Value, max_batch: usize, truncate: bool, largest: &AtomicUsize) -> (u16, Value) {
    let cut = |n: usize| if truncate { n.saturating_sub(1) } else { n };
    match route {
        "/embed" => {
            let Some(texts) = body["texts"].as_array() else {
                return (400, json!({"error": "expected {\"texts\": [...]}"}));
            };
            largest.fetch_max(texts.len(), Ordering::SeqCst);
            if texts.len() > max_batch {
                return (413, json!({"error": "batch too large"}));
            }
            let out: Vec<Vec<f64>> = texts.iter().take(cut(texts.len())).map(|t| stub.embed_one(t.as_str().unwrap_or(""))).collect();
            (200, json!({ "embeddings": out }))
        }
        "/nli" => {
            let Some(pairs) = body["pairs"].as_array() else {
                return (400, json!({"error": "expected {\"pairs\": [...]}"}));
            };
            largest.fetch_max(pairs.len(), Ordering::SeqCst);
            if pairs.len() > max_batch {
                return (413, json!({"error": "batch too large"}));
            }
            let parsed: Result<Vec<NliPair>, _> = pairs.iter().map(|p| serde_json::from_value(p.clone())).collect();
            let Ok(parsed) = parsed else {
                return (400, json!({"error": "pairs need premise and hypothesis"}));
            };
            let out: Vec<f64> = parsed.iter().take(cut(parsed.len())).map(|p| stub.entail(&p.premise, &p.hypothesis)).collect();
            (200, json!({ "entail_probs": out }))
        }
        _ => (404, json!({"error": "no such route"})),
    }
}
