use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use sha2::{Digest, Sha256};

use super::{Backend, BackendError, ChatRequest};

/// Content address of a response: model, both prompt parts and the seed.
pub fn fixture_key(model_id: &str, system: &str, user: &str, seed: u64) -> String {
    let mut h = Sha256::new();
    for part in [model_id, system, user] {
        h.update(part.as_bytes());
        h.update([0u8]);
    }
    h.update(seed.to_string().as_bytes());
    hex::encode(h.finalize())
}

fn request_key(request: &ChatRequest<'_>) -> String {
    fixture_key(&request.endpoint.model_id, &request.prompt.system, &request.prompt.user, request.options.seed)
}

/// Directory of raw response bodies, one file per key.
#[derive(Debug, Clone)]
pub struct ReplayStore {
    dir: PathBuf,
}

impl ReplayStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    fn path(&self, key: &str) -> PathBuf {
        self.dir.join(format!("{key}.json"))
    }

    pub fn get(&self, key: &str) -> Option<String> {
        fs::read_to_string(self.path(key)).ok()
    }

    pub fn put(&self, key: &str, body: &str) -> std::io::Result<()> {
        fs::create_dir_all(&self.dir)?;
        let target = self.path(key);
        let tmp = self.dir.join(format!(".{key}.{}.tmp", std::process::id()));
        let mut f = fs::File::create(&tmp)?;
        f.write_all(body.as_bytes())?;
        f.sync_all()?;
        fs::rename(tmp, target)
    }

    pub fn len(&self) -> usize {
        fs::read_dir(&self.dir)
            .map(|d| d.filter_map(Result::ok).filter(|e| e.path().extension().is_some_and(|x| x == "json")).count())
            .unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub struct ReplayBackend {
    store: ReplayStore,
}

impl ReplayBackend {
    pub fn new(store: ReplayStore) -> Self {
        Self { store }
    }
}

impl Backend for ReplayBackend {
    fn chat(&self, request: &ChatRequest<'_>) -> Result<String, BackendError> {
        let key = request_key(request);
        self.store.get(&key).ok_or(BackendError::MissingFixture(key))
    }
}

/// Passes requests through and stores every successful body.
pub struct RecordingBackend {
    inner: Arc<dyn Backend>,
    store: ReplayStore,
}

impl RecordingBackend {
    pub fn new(inner: Arc<dyn Backend>, store: ReplayStore) -> Self {
        Self { inner, store }
    }
}

impl Backend for RecordingBackend {
    fn chat(&self, request: &ChatRequest<'_>) -> Result<String, BackendError> {
        let body = self.inner.chat(request)?;
        self.store
            .put(&request_key(request), &body)
            .map_err(|e| BackendError::Transport(format!("cannot record fixture: {e}")))?;
        Ok(body)
    }

    fn probe(&self, timeout: std::time::Duration) -> Result<(), BackendError> {
        self.inner.probe(timeout)
    }
}
