//! Run manifest written next to every output.

use std::path::Path;

use anyhow::Result;
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub version: String,
    pub wall_time_s: f64,
    /// SHA-256 over the canonical JSON of command, config, seed and any
    /// input file contents, hashed git-blob style ("blob <len>\0<bytes>").
    pub input_hash: String,
}

pub fn input_hash(command: &str, config: &serde_json::Value, seed: Option<u64>, inputs: &[Vec<u8>]) -> String {
    let mut body = serde_json::to_vec(&serde_json::json!({ "command": command, "config": config, "seed": seed }))
        .expect("json values serialize");
    for i in inputs {
        body.extend_from_slice(i);
    }
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", body.len()).as_bytes());
    h.update(&body);
    hex::encode(h.finalize())
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> Result<()> {
        zakradar::io::write_json(&dir.join("manifest.json"), self)?;
        Ok(())
    }
}
