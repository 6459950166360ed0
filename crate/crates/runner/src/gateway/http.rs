use std::io::Read;
use std::time::Duration;

use serde_json::{json, Value};

use super::{Backend, BackendError, ChatRequest};

/// Request body for `POST {base}/api/chat`.
pub fn chat_body(request: &ChatRequest<'_>) -> Value {
    let o = &request.options;
    let mut body = json!({
        "model": request.endpoint.model_id,
        "messages": [
            {"role": "system", "content": request.prompt.system},
            {"role": "user", "content": request.prompt.user},
        ],
        "stream": false,
        "options": {
            "temperature": o.temperature,
            "top_p": o.top_p,
            "num_ctx": o.context_window,
            "num_predict": o.max_new_tokens,
            "seed": o.seed,
        },
    });
    if request.endpoint.json_schema {
        body["format"] = request.prompt.schema.json_schema();
    }
    body
}

/// Ollama-compatible chat endpoint.
pub struct HttpBackend {
    base: String,
    url: String,
}

impl HttpBackend {
    pub fn new(base_url: &str) -> Self {
        let base = base_url.trim_end_matches('/').to_string();
        Self { url: format!("{base}/api/chat"), base }
    }
}

fn agent(timeout: Duration) -> ureq::Agent {
    ureq::Agent::config_builder()
        .timeout_global(Some(timeout))
        .http_status_as_error(true)
        .build()
        .into()
}

fn classify(e: ureq::Error) -> BackendError {
    match e {
        ureq::Error::Timeout(_) => BackendError::Timeout,
        ureq::Error::Io(e) if e.kind() == std::io::ErrorKind::TimedOut => BackendError::Timeout,
        e => BackendError::Transport(e.to_string()),
    }
}

impl Backend for HttpBackend {
    fn chat(&self, request: &ChatRequest<'_>) -> Result<String, BackendError> {
        let payload = serde_json::to_vec(&chat_body(request)).expect("request body serializes");
        let mut response = agent(request.endpoint.timeout())
            .post(&self.url)
            .header("content-type", "application/json")
            .send(&payload[..])
            .map_err(classify)?;
        let mut text = String::new();
        match response.body_mut().as_reader().read_to_string(&mut text) {
            Ok(_) => Ok(text),
            Err(e) if e.kind() == std::io::ErrorKind::TimedOut => Err(BackendError::Timeout),
            Err(e) if e.to_string().to_lowercase().contains("timeout") => Err(BackendError::Timeout),
            Err(e) => Err(BackendError::Transport(e.to_string())),
        }
    }

    /// `GET {base}/api/tags`, which lists installed models.
    fn probe(&self, timeout: Duration) -> Result<(), BackendError> {
        agent(timeout).get(&format!("{}/api/tags", self.base)).call().map(drop).map_err(classify)
    }
}
