//! Embedding and NLI providers.
//!
//! Production providers are HTTP services speaking a small JSON protocol:
//!
//! ```text
//! POST {base_url}/embed  {"texts": [str, ...]}
//!   -> {"embeddings": [[number, ...], ...]}
//! POST {base_url}/nli    {"pairs": [{"premise": str, "hypothesis": str}, ...]}
//!   -> {"entail_probs": [number, ...]}
//! ```
//!
//! Responses must preserve request order and length. [`StubProvider`] is a
//! deterministic in-process double with the same semantics as the sidecar's
//! stub mode.

use std::thread;
use std::time::Duration;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::text::{jaccard_of_sets, token_set};

/// Attempts after the first failure.
pub const MAX_RETRIES: u32 = 3;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProviderError {
    #[error("{url}: HTTP {status}: {body}")]
    Http { url: String, status: u16, body: String },
    #[error("{url}: transport error: {message}")]
    Transport { url: String, message: String },
    #[error("{url}: protocol error: {message}")]
    Protocol { url: String, message: String },
    #[error("invalid endpoint configuration: {0}")]
    Config(String),
}

impl ProviderError {
    fn retryable(&self) -> bool {
        matches!(self, ProviderError::Http { .. } | ProviderError::Transport { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProviderEndpoint {
    pub base_url: String,
    pub timeout_ms: u64,
    pub max_batch: usize,
    pub max_parallel: usize,
}

impl ProviderEndpoint {
    pub fn new(base_url: impl Into<String>) -> Self {
        Self { base_url: base_url.into(), timeout_ms: 30_000, max_batch: 32, max_parallel: 4 }
    }

    pub fn validate(&self) -> Result<(), ProviderError> {
        if self.timeout_ms == 0 {
            return Err(ProviderError::Config("timeout_ms must be positive".into()));
        }
        if self.max_batch == 0 || self.max_parallel == 0 {
            return Err(ProviderError::Config("max_batch and max_parallel must be ≥ 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NliPair {
    pub premise: String,
    pub hypothesis: String,
}

pub trait Provider: Send + Sync {
    /// Identity recorded in cache keys and run metadata.
    fn model_id(&self) -> &str;
    fn max_batch(&self) -> usize;
    fn max_parallel(&self) -> usize;
    /// One vector per text, in order. `texts.len() <= max_batch()`.
    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError>;
    /// One entailment probability per pair, in order.
    fn nli(&self, pairs: &[NliPair]) -> Result<Vec<f64>, ProviderError>;
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    embeddings: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct NliRequest<'a> {
    pairs: &'a [NliPair],
}

#[derive(Deserialize)]
struct NliResponse {
    entail_probs: Vec<f64>,
}

pub struct HttpProvider {
    endpoint: ProviderEndpoint,
    model_id: String,
    agent: ureq::Agent,
    backoff: Duration,
}

impl HttpProvider {
    /// `model_id` defaults to the base URL when the operator does not name
    /// the served models.
    pub fn new(endpoint: ProviderEndpoint, model_id: Option<String>) -> Result<Self, ProviderError> {
        endpoint.validate()?;
        let agent = ureq::AgentBuilder::new()
            .timeout(Duration::from_millis(endpoint.timeout_ms))
            .build();
        let model_id = model_id.unwrap_or_else(|| endpoint.base_url.trim_end_matches('/').to_string());
        Ok(Self { endpoint, model_id, agent, backoff: Duration::from_millis(200) })
    }

    /// Base delay of the exponential backoff (doubles per retry).
    pub fn with_backoff(mut self, base: Duration) -> Self {
        self.backoff = base;
        self
    }

    pub fn endpoint(&self) -> &ProviderEndpoint {
        &self.endpoint
    }

    fn url(&self, route: &str) -> String {
        format!("{}/{route}", self.endpoint.base_url.trim_end_matches('/'))
    }

    fn post_once<Req: Serialize, Resp: serde::de::DeserializeOwned>(
        &self,
        url: &str,
        body: &Req,
    ) -> Result<Resp, ProviderError> {
        match self.agent.post(url).send_json(body) {
            Ok(resp) => resp.into_json().map_err(|e| ProviderError::Protocol {
                url: url.to_string(),
                message: format!("bad response body: {e}"),
            }),
            Err(ureq::Error::Status(status, resp)) => Err(ProviderError::Http {
                url: url.to_string(),
                status,
                body: resp.into_string().unwrap_or_default(),
            }),
            Err(ureq::Error::Transport(t)) => {
                Err(ProviderError::Transport { url: url.to_string(), message: t.to_string() })
            }
        }
    }

    fn post<Req: Serialize, Resp: serde::de::DeserializeOwned>(
        &self,
        route: &str,
        body: &Req,
    ) -> Result<Resp, ProviderError> {
        let url = self.url(route);
        let mut attempt = 0;
        loop {
            match self.post_once(&url, body) {
                Ok(resp) => return Ok(resp),
                Err(err) if err.retryable() && attempt < MAX_RETRIES => {
                    let delay = self.backoff * 2u32.pow(attempt);
                    log::warn!("{err}; retrying in {delay:?}");
                    thread::sleep(delay);
                    attempt += 1;
                }
                Err(err) => return Err(err),
            }
        }
    }
}

fn check_len(url: String, expected: usize, got: usize) -> Result<(), ProviderError> {
    if expected == got {
        Ok(())
    } else {
        Err(ProviderError::Protocol { url, message: format!("expected {expected} results, got {got}") })
    }
}

impl Provider for HttpProvider {
    fn model_id(&self) -> &str {
        &self.model_id
    }

    fn max_batch(&self) -> usize {
        self.endpoint.max_batch
    }

    fn max_parallel(&self) -> usize {
        self.endpoint.max_parallel
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError> {
        let resp: EmbedResponse = self.post("embed", &EmbedRequest { texts })?;
        check_len(self.url("embed"), texts.len(), resp.embeddings.len())?;
        if let Some(dim) = resp.embeddings.first().map(Vec::len) {
            if resp.embeddings.iter().any(|e| e.len() != dim) {
                return Err(ProviderError::Protocol {
                    url: self.url("embed"),
                    message: "embeddings have inconsistent dimensions".into(),
                });
            }
        }
        Ok(resp.embeddings)
    }

    fn nli(&self, pairs: &[NliPair]) -> Result<Vec<f64>, ProviderError> {
        let resp: NliResponse = self.post("nli", &NliRequest { pairs })?;
        check_len(self.url("nli"), pairs.len(), resp.entail_probs.len())?;
        if let Some(p) = resp.entail_probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(ProviderError::Protocol {
                url: self.url("nli"),
                message: format!("entailment probability {p} outside [0, 1]"),
            });
        }
        Ok(resp.entail_probs)
    }
}

/// Deterministic stand-in for a real provider.
///
/// Embeddings are unit vectors seeded from a SHA-256 of the text, so equal
/// texts embed identically across processes. Entailment is 1 for identical
/// premise/hypothesis and the Jaccard similarity of their token sets
/// otherwise.
#[derive(Debug, Clone)]
pub struct StubProvider {
    pub dim: usize,
    pub max_batch: usize,
}

impl Default for StubProvider {
    fn default() -> Self {
        Self { dim: 16, max_batch: 64 }
    }
}

impl StubProvider {
    pub const MODEL_ID: &'static str = "stub";

    pub fn embed_one(&self, text: &str) -> Vec<f64> {
        let seed: [u8; 32] = Sha256::digest(text.as_bytes()).into();
        let mut rng = ChaCha8Rng::from_seed(seed);
        let v: Vec<f64> = (0..self.dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.into_iter().map(|x| x / norm).collect()
    }

    pub fn entail(&self, premise: &str, hypothesis: &str) -> f64 {
        if premise == hypothesis {
            1.0
        } else {
            jaccard_of_sets(&token_set(premise), &token_set(hypothesis))
        }
    }
}

impl Provider for StubProvider {
    fn model_id(&self) -> &str {
        Self::MODEL_ID
    }

    fn max_batch(&self) -> usize {
        self.max_batch
    }

    fn max_parallel(&self) -> usize {
        1
    }

    fn embed(&self, texts: &[String]) -> Result<Vec<Vec<f64>>, ProviderError> {
        Ok(texts.iter().map(|t| self.embed_one(t)).collect())
    }

    fn nli(&self, pairs: &[NliPair]) -> Result<Vec<f64>, ProviderError> {
        Ok(pairs.iter().map(|p| self.entail(&p.premise, &p.hypothesis)).collect())
    }
}
