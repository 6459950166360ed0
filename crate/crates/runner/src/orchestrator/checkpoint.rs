use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, RunError};
use crate::pipeline::Outcome;

pub const CHECKPOINT_FILE: &str = "checkpoint.json";
pub const OUTCOMES_FILE: &str = "outcomes.jsonl";

/// Progress of a per-question run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub config_hash: String,
    /// In completion order; never shrinks.
    pub completed_question_ids: Vec<String>,
    /// Byte length of the outcome stream covered by `completed_question_ids`.
    pub outcomes_offset: u64,
    pub wall_clock_s: f64,
}

impl Checkpoint {
    pub fn new(config_hash: &str) -> Self {
        Self { config_hash: config_hash.into(), completed_question_ids: Vec::new(), outcomes_offset: 0, wall_clock_s: 0.0 }
    }

    pub fn load(dir: &Path) -> Result<Option<Self>> {
        let path = dir.join(CHECKPOINT_FILE);
        match fs::read_to_string(&path) {
            Ok(text) => serde_json::from_str(&text)
                .map(Some)
                .map_err(|e| RunError::Config(format!("{}: corrupt checkpoint: {e}", path.display()))),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(None),
            Err(e) => Err(RunError::io(path, e)),
        }
    }

    /// Write to a temporary file, sync, then rename over the old checkpoint.
    pub fn save(&self, dir: &Path) -> Result<()> {
        let path = dir.join(CHECKPOINT_FILE);
        let tmp = dir.join(format!(".{CHECKPOINT_FILE}.tmp"));
        let json = serde_json::to_vec_pretty(self).expect("checkpoint serializes");
        let write = || -> std::io::Result<()> {
            let mut f = File::create(&tmp)?;
            f.write_all(&json)?;
            f.sync_all()?;
            fs::rename(&tmp, &path)
        };
        write().map_err(|e| RunError::io(&path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeLine {
    pub id: String,
    pub outcome: Outcome,
}

/// Append-only JSONL of per-question outcomes.
pub struct OutcomeLog {
    path: PathBuf,
    file: File,
    offset: u64,
}

impl OutcomeLog {
    /// Open for appending after dropping anything past `offset`, which
    /// discards a line torn by an interrupted write.
    pub fn open(dir: &Path, offset: u64) -> Result<Self> {
        let path = dir.join(OUTCOMES_FILE);
        let file = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| RunError::io(&path, e))?;
        file.set_len(offset).map_err(|e| RunError::io(&path, e))?;
        Ok(Self { path, file, offset })
    }

    /// Append one record and return the new end offset.
    pub fn append(&mut self, line: &OutcomeLine) -> Result<u64> {
        let mut bytes = serde_json::to_vec(line).expect("outcome serializes");
        bytes.push(b'\n');
        self.file.write_all(&bytes).map_err(|e| RunError::io(&self.path, e))?;
        self.file.sync_data().map_err(|e| RunError::io(&self.path, e))?;
        self.offset += bytes.len() as u64;
        Ok(self.offset)
    }

    pub fn read_all(dir: &Path) -> Result<Vec<OutcomeLine>> {
        let path = dir.join(OUTCOMES_FILE);
        let file = File::open(&path).map_err(|e| RunError::io(&path, e))?;
        BufReader::new(file)
            .lines()
            .enumerate()
            .map(|(i, line)| {
                let line = line.map_err(|e| RunError::io(&path, e))?;
                serde_json::from_str(&line).map_err(|e| {
                    RunError::Data(crate::dataset::DataError::Schema { path: path.clone(), line: i + 1, message: e.to_string() })
                })
            })
            .collect()
    }
}
