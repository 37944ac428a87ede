//! Run manifest: everything needed to reproduce or audit a run.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialTiming {
    pub setting: String,
    pub trial: usize,
    pub method: String,
    pub seed: u64,
    pub wall_time_seconds: f64,
    pub status: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    /// sha256 of the canonical (key-sorted) JSON of `config`.
    pub config_hash: String,
    pub config: serde_json::Value,
    pub base_seed: u64,
    pub started_at: String,
    pub finished_at: String,
    pub timings: Vec<TrialTiming>,
    pub notes: Vec<String>,
}

/// Serializes with object keys sorted at every level.
pub fn canonical_json(value: &serde_json::Value) -> String {
    fn sort(v: &serde_json::Value) -> serde_json::Value {
        match v {
            serde_json::Value::Object(map) => {
                let mut entries: Vec<_> = map.iter().collect();
                entries.sort_by(|a, b| a.0.cmp(b.0));
                serde_json::Value::Object(
                    entries
                        .into_iter()
                        .map(|(k, v)| (k.clone(), sort(v)))
                        .collect(),
                )
            }
            serde_json::Value::Array(items) => {
                serde_json::Value::Array(items.iter().map(sort).collect())
            }
            other => other.clone(),
        }
    }
    sort(value).to_string()
}

pub fn config_hash(config: &serde_json::Value) -> String {
    hex::encode(Sha256::digest(canonical_json(config).as_bytes()))
}

pub fn now_rfc3339() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn start(command: &str, config: serde_json::Value, base_seed: u64) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: config_hash(&config),
            config,
            base_seed,
            started_at: now_rfc3339(),
            finished_at: String::new(),
            timings: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn finish(&mut self) {
        self.finished_at = now_rfc3339();
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| CliError::io(path, e))
    }
}
