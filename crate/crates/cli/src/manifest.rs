//! Run manifest: a JSON snapshot of everything needed to reproduce a run
//! and locate its artifacts.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Written next to the run outputs. The config snapshot plus the input
/// digests suffice to rerun bit-identically; timings are informational.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    /// Flag-for-flag snapshot of the effective configuration.
    pub config: serde_json::Value,
    /// SHA-256 of every input file, keyed by role.
    pub input_digests: BTreeMap<String, String>,
    /// Wall-clock stage timings in milliseconds.
    pub stage_timings_ms: BTreeMap<String, u128>,
    /// Every artifact the run emitted.
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(config: serde_json::Value) -> Self {
        RunManifest {
            config,
            input_digests: BTreeMap::new(),
            stage_timings_ms: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    pub fn record_input(&mut self, role: &str, path: &Path) -> std::io::Result<()> {
        let bytes = std::fs::read(path)?;
        let digest = Sha256::digest(&bytes);
        self.input_digests
            .insert(role.to_string(), format!("{digest:x}"));
        Ok(())
    }

    pub fn record_output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub fn record_timing(&mut self, stage: &str, elapsed: std::time::Duration) {
        self.stage_timings_ms
            .insert(stage.to_string(), elapsed.as_millis());
    }

    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(path, text)
    }
}
