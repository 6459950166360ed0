//! JSONL dataset loading.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use consensus_core::relation::{RelationInstance, RelationPrediction};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}:{line}: {message}")]
    Schema { path: PathBuf, line: usize, message: String },
    #[error("{path}:{line}: duplicate id `{id}`")]
    DuplicateId { path: PathBuf, line: usize, id: String },
}

/// One multi-hop question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub id: String,
    pub question: String,
    #[serde(alias = "answer")]
    pub gold: String,
    /// `(title, sentences)` paragraphs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context: Option<Vec<(String, Vec<String>)>>,
}

pub trait Keyed {
    fn key(&self) -> &str;
}

impl Keyed for QuestionRecord {
    fn key(&self) -> &str {
        &self.id
    }
}

impl Keyed for RelationInstance {
    fn key(&self) -> &str {
        &self.doc_id
    }
}

impl Keyed for RelationPrediction {
    fn key(&self) -> &str {
        &self.doc_id
    }
}

/// Parse one record per non-blank line; ids must be unique and the file
/// must hold at least one record.
pub fn load_jsonl<T: DeserializeOwned + Keyed>(path: &Path) -> Result<Vec<T>, DataError> {
    let text = fs::read_to_string(path).map_err(|source| DataError::Io { path: path.into(), source })?;
    let mut seen = BTreeSet::new();
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: T = serde_json::from_str(line).map_err(|e| DataError::Schema {
            path: path.into(),
            line: i + 1,
            message: e.to_string(),
        })?;
        if !seen.insert(record.key().to_string()) {
            return Err(DataError::DuplicateId { path: path.into(), line: i + 1, id: record.key().to_string() });
        }
        records.push(record);
    }
    if records.is_empty() {
        return Err(DataError::Schema { path: path.into(), line: 1, message: "no records".into() });
    }
    Ok(records)
}

pub fn load_questions(path: &Path) -> Result<Vec<QuestionRecord>, DataError> {
    let records: Vec<QuestionRecord> = load_jsonl(path)?;
    if let Some((i, r)) = records.iter().enumerate().find(|(_, r)| r.id.trim().is_empty() || r.question.trim().is_empty()) {
        return Err(DataError::Schema {
            path: path.into(),
            line: i + 1,
            message: format!("record `{}` needs a non-empty id and question", r.id),
        });
    }
    Ok(records)
}

pub fn load_instances(path: &Path) -> Result<Vec<RelationInstance>, DataError> {
    load_jsonl(path)
}

pub fn load_predictions(path: &Path) -> Result<Vec<RelationPrediction>, DataError> {
    load_jsonl(path)
}
