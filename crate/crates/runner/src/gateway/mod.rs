//! One client over live HTTP endpoints, recorded fixtures and the simulator.

mod http;
mod limiter;
mod replay;
mod sim;

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use consensus_core::{parse_structured_output, ParseFailure, ParseFailureReason, SampleResponse};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::prompts::PromptBundle;

pub use http::{chat_body, HttpBackend};
pub use limiter::Limiter;
pub use replay::{fixture_key, RecordingBackend, ReplayBackend, ReplayStore};
pub use sim::{SimBackend, SimProfile, SimScript, GOLD_TOKEN, UNPARSED_TOKEN};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GatewayError {
    #[error("{endpoint}: transport failure: {detail}")]
    Transport { endpoint: String, detail: String },
    #[error("{endpoint}: no response within {seconds} s")]
    Timeout { endpoint: String, seconds: f64 },
    #[error("no fixture {key} for endpoint {endpoint}")]
    MissingFixture { endpoint: String, key: String },
    #[error("unknown endpoint `{0}`")]
    UnknownEndpoint(String),
    #[error("endpoint `{0}` is misconfigured: {1}")]
    InvalidEndpoint(String, String),
    #[error("empty prompt for question `{0}`")]
    EmptyPrompt(String),
}

/// Failure inside a backend, before the gateway attaches endpoint names.
#[derive(Debug, Clone, PartialEq)]
pub enum BackendError {
    Transport(String),
    Timeout,
    MissingFixture(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenerationOptions {
    pub temperature: f64,
    pub top_p: f64,
    pub context_window: u32,
    pub max_new_tokens: u32,
    pub seed: u64,
}

impl Default for GenerationOptions {
    fn default() -> Self {
        Self { temperature: 0.3, top_p: 0.9, context_window: 8192, max_new_tokens: 4096, seed: 42 }
    }
}

impl GenerationOptions {
    /// Extraction requests generate at most 1024 tokens.
    pub fn extraction() -> Self {
        Self { max_new_tokens: 1024, ..Self::default() }
    }
}

fn default_timeout() -> f64 {
    600.0
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndpointSpec {
    pub name: String,
    /// An `http(s)://` URL, or the tags `sim` / `replay`.
    pub base_url: String,
    /// Environment variable that overrides `base_url` when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub base_url_env: Option<String>,
    pub model_id: String,
    #[serde(default)]
    pub options: GenerationOptions,
    #[serde(default = "default_timeout")]
    pub timeout_s: f64,
    /// Send the output JSON schema as the `format` field.
    #[serde(default = "default_true")]
    pub json_schema: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimProfile>,
}

impl EndpointSpec {
    pub fn new(name: &str, base_url: &str, model_id: &str) -> Self {
        Self {
            name: name.into(),
            base_url: base_url.into(),
            base_url_env: None,
            model_id: model_id.into(),
            options: GenerationOptions::default(),
            timeout_s: default_timeout(),
            json_schema: true,
            sim: None,
        }
    }

    pub fn simulated(name: &str, profile: SimProfile) -> Self {
        Self { sim: Some(profile), ..Self::new(name, "sim", name) }
    }

    pub fn timeout(&self) -> Duration {
        Duration::from_secs_f64(self.timeout_s)
    }

    /// `base_url` after the environment override.
    pub fn resolved_base_url(&self) -> String {
        self.base_url_env
            .as_deref()
            .and_then(|var| std::env::var(var).ok())
            .unwrap_or_else(|| self.base_url.clone())
    }
}

/// One request as seen by a backend.
#[derive(Debug, Clone)]
pub struct ChatRequest<'a> {
    pub endpoint: &'a EndpointSpec,
    pub prompt: &'a PromptBundle,
    pub options: GenerationOptions,
    pub sample_index: usize,
}

/// A backend returns the raw response body in the Ollama `/api/chat` shape.
pub trait Backend: Send + Sync {
    fn chat(&self, request: &ChatRequest<'_>) -> Result<String, BackendError>;

    /// Cheap reachability check made before a run starts.
    fn probe(&self, _timeout: Duration) -> Result<(), BackendError> {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetryPolicy {
    pub malformed_retries: u32,
    pub transport_retries: u32,
    pub backoff_ms: u64,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { malformed_retries: 1, transport_retries: 2, backoff_ms: 500 }
    }
}

#[derive(Debug, Clone, Default)]
pub struct GatewaySettings {
    pub retry: RetryPolicy,
    /// Concurrent requests across all endpoints; 0 means the default of 2.
    pub workers: usize,
    /// Fixture directory for `replay` endpoints.
    pub replay_dir: Option<PathBuf>,
    /// When set, every non-replay response is also stored here.
    pub record_dir: Option<PathBuf>,
    /// Gold answers by question id, for simulator `@gold` entries.
    pub golds: BTreeMap<String, String>,
}

struct Resolved {
    spec: EndpointSpec,
    backend: Arc<dyn Backend>,
}

pub struct Gateway {
    endpoints: BTreeMap<String, Resolved>,
    retry: RetryPolicy,
    limiter: Arc<Limiter>,
}

/// Pull `message.content` out of an `/api/chat` body.
pub fn message_content(body: &str) -> Result<String, BackendError> {
    let value: serde_json::Value =
        serde_json::from_str(body).map_err(|e| BackendError::Transport(format!("response is not JSON: {e}")))?;
    value
        .pointer("/message/content")
        .and_then(|c| c.as_str())
        .map(str::to_string)
        .ok_or_else(|| BackendError::Transport("response has no message.content".into()))
}

impl Gateway {
    pub fn new(endpoints: &[EndpointSpec], settings: GatewaySettings) -> Result<Self, GatewayError> {
        let golds = Arc::new(settings.golds);
        let mut resolved = BTreeMap::new();
        for spec in endpoints {
            if !(spec.timeout_s > 0.0) {
                return Err(GatewayError::InvalidEndpoint(spec.name.clone(), "timeout_s must be positive".into()));
            }
            let url = spec.resolved_base_url();
            let backend: Arc<dyn Backend> = match url.as_str() {
                "sim" => {
                    let profile = spec.sim.clone().ok_or_else(|| {
                        GatewayError::InvalidEndpoint(spec.name.clone(), "sim backend needs a `sim` profile".into())
                    })?;
                    Arc::new(SimBackend::new(profile, Arc::clone(&golds)))
                }
                "replay" => {
                    let dir = settings.replay_dir.clone().ok_or_else(|| {
                        GatewayError::InvalidEndpoint(spec.name.clone(), "replay backend needs a fixture directory".into())
                    })?;
                    Arc::new(ReplayBackend::new(ReplayStore::new(dir)))
                }
                u if u.starts_with("http://") || u.starts_with("https://") => Arc::new(HttpBackend::new(u)),
                other => {
                    return Err(GatewayError::InvalidEndpoint(spec.name.clone(), format!("unsupported base_url `{other}`")))
                }
            };
            let backend = match (&settings.record_dir, url.as_str()) {
                (Some(dir), u) if u != "replay" => {
                    Arc::new(RecordingBackend::new(backend, ReplayStore::new(dir.clone()))) as Arc<dyn Backend>
                }
                _ => backend,
            };
            if resolved.insert(spec.name.clone(), Resolved { spec: spec.clone(), backend }).is_some() {
                return Err(GatewayError::InvalidEndpoint(spec.name.clone(), "duplicate endpoint name".into()));
            }
        }
        let workers = if settings.workers == 0 { 2 } else { settings.workers };
        Ok(Self { endpoints: resolved, retry: settings.retry, limiter: Arc::new(Limiter::new(workers)) })
    }

    /// Fail fast when some endpoint cannot be reached.
    pub fn probe(&self) -> Result<(), GatewayError> {
        for (name, r) in &self.endpoints {
            let timeout = r.spec.timeout().min(Duration::from_secs(10));
            r.backend.probe(timeout).map_err(|e| match e {
                BackendError::Timeout => GatewayError::Timeout { endpoint: name.clone(), seconds: timeout.as_secs_f64() },
                BackendError::Transport(detail) | BackendError::MissingFixture(detail) => {
                    GatewayError::Transport { endpoint: name.clone(), detail }
                }
            })?;
        }
        Ok(())
    }

    pub fn with_backend(mut self, spec: EndpointSpec, backend: Arc<dyn Backend>) -> Self {
        self.endpoints.insert(spec.name.clone(), Resolved { spec, backend });
        self
    }

    pub fn endpoint(&self, name: &str) -> Result<&EndpointSpec, GatewayError> {
        self.endpoints.get(name).map(|r| &r.spec).ok_or_else(|| GatewayError::UnknownEndpoint(name.into()))
    }

    /// One sample with the endpoint's own options.
    pub fn generate(&self, prompt: &PromptBundle, endpoint: &str) -> Result<SampleResponse, GatewayError> {
        let options = self.endpoint(endpoint)?.options;
        self.generate_with(prompt, endpoint, options, 0)
    }

    /// One sample with explicit options. Malformed model output comes back
    /// as a parse failure inside the response, not as an error.
    pub fn generate_with(
        &self,
        prompt: &PromptBundle,
        endpoint: &str,
        options: GenerationOptions,
        sample_index: usize,
    ) -> Result<SampleResponse, GatewayError> {
        if prompt.is_empty() {
            return Err(GatewayError::EmptyPrompt(prompt.question_id.clone()));
        }
        let resolved = self.endpoints.get(endpoint).ok_or_else(|| GatewayError::UnknownEndpoint(endpoint.into()))?;
        let spec = &resolved.spec;
        let request = ChatRequest { endpoint: spec, prompt, options, sample_index };
        let started = Instant::now();
        let mut transport_failures = 0;
        let mut malformed = 0;
        loop {
            let outcome = {
                let _slot = self.limiter.acquire();
                resolved.backend.chat(&request)
            };
            let err = match outcome.and_then(|body| message_content(&body)) {
                Ok(raw_text) => {
                    let parsed = parse_structured_output(&raw_text, prompt.schema);
                    if parsed.is_err() && malformed < self.retry.malformed_retries {
                        malformed += 1;
                        tracing::debug!(endpoint, question = %prompt.question_id, "malformed output, retrying");
                        continue;
                    }
                    return Ok(SampleResponse {
                        endpoint: spec.name.clone(),
                        sample_index,
                        raw_text,
                        parsed,
                        latency_ms: started.elapsed().as_millis() as u64,
                    });
                }
                Err(e) => e,
            };
            match err {
                BackendError::Timeout => {
                    return Err(GatewayError::Timeout { endpoint: spec.name.clone(), seconds: spec.timeout_s })
                }
                BackendError::MissingFixture(key) => {
                    return Err(GatewayError::MissingFixture { endpoint: spec.name.clone(), key })
                }
                BackendError::Transport(detail) => {
                    if transport_failures >= self.retry.transport_retries {
                        return Err(GatewayError::Transport { endpoint: spec.name.clone(), detail });
                    }
                    let wait = self.retry.backoff_ms.saturating_mul(1 << transport_failures);
                    tracing::warn!(endpoint, %detail, wait_ms = wait, "transport failure, retrying");
                    std::thread::sleep(Duration::from_millis(wait));
                    transport_failures += 1;
                }
            }
        }
    }

    /// `k` samples; sample `i` uses seed `seed_base + i`. Fails only when
    /// every sample fails; isolated failures become unparsed samples.
    pub fn sample_k(
        &self,
        prompt: &PromptBundle,
        endpoint: &str,
        k: usize,
        temperature: f64,
        seed_base: u64,
    ) -> Result<Vec<SampleResponse>, GatewayError> {
        let base = self.endpoint(endpoint)?.options;
        let results: Vec<Result<SampleResponse, GatewayError>> = std::thread::scope(|scope| {
            let handles: Vec<_> = (0..k)
                .map(|i| {
                    let options = GenerationOptions { temperature, seed: seed_base + i as u64, ..base };
                    scope.spawn(move || self.generate_with(prompt, endpoint, options, i))
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("sampling thread panicked")).collect()
        });
        if let Some(Err(first)) = results.first().filter(|_| results.iter().all(Result::is_err)) {
            return Err(first.clone());
        }
        Ok(results
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                r.unwrap_or_else(|e| SampleResponse {
                    endpoint: endpoint.to_string(),
                    sample_index: i,
                    raw_text: String::new(),
                    parsed: Err(ParseFailure::new(ParseFailureReason::Transport, e.to_string())),
                    latency_ms: 0,
                })
            })
            .collect())
    }
}
