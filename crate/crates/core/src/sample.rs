//! Values produced by one model generation.

use alloc::string::String;
use alloc::vec::Vec;
use serde::{Deserialize, Serialize};

/// Structured payload recovered from a generation.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ParsedOutput {
    pub answer: String,
    #[serde(default)]
    pub reasoning_chain: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParseFailureReason {
    NoObjectFound,
    InvalidStructure,
    MissingField,
    /// The backend never produced text (transport failure after retries).
    Transport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParseFailure {
    pub reason: ParseFailureReason,
    #[serde(default)]
    pub detail: String,
}

impl ParseFailure {
    pub fn new(reason: ParseFailureReason, detail: impl Into<String>) -> Self {
        Self {
            reason,
            detail: detail.into(),
        }
    }
}

/// One raw generation plus its parse status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleResponse {
    pub endpoint: String,
    pub sample_index: usize,
    pub raw_text: String,
    pub parsed: Result<ParsedOutput, ParseFailure>,
    pub latency_ms: u64,
}

impl SampleResponse {
    pub fn parsed(&self) -> Option<&ParsedOutput> {
        self.parsed.as_ref().ok()
    }

    pub fn is_unparsed(&self) -> bool {
        self.parsed.is_err()
    }
}
