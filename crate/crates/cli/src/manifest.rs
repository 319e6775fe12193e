//! Run manifest written next to every set of outputs.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Serialize)]
pub struct StageTiming {
    pub stage: &'static str,
    pub seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub command: &'static str,
    pub command_line: Vec<String>,
    pub threads: usize,
    pub config: serde_json::Value,
    pub seeds: BTreeMap<String, u64>,
    /// SHA-256 of each input file's bytes, keyed by the path as given.
    pub input_checksums: BTreeMap<String, String>,
    /// Output file names relative to the output directory.
    pub outputs: Vec<String>,
    pub timings: Vec<StageTiming>,
    pub results: serde_json::Value,
}

impl RunManifest {
    pub fn new(command: &'static str, command_line: Vec<String>) -> Self {
        Self {
            tool: format!("graphforge {}", env!("CARGO_PKG_VERSION")),
            command,
            command_line,
            threads: rayon::current_num_threads(),
            config: serde_json::Value::Null,
            seeds: BTreeMap::new(),
            input_checksums: BTreeMap::new(),
            outputs: Vec::new(),
            timings: Vec::new(),
            results: serde_json::Value::Null,
        }
    }

    /// Runs `f` and records its wall-clock time under `stage`.
    pub fn time<T>(&mut self, stage: &'static str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.timings.push(StageTiming { stage, seconds: start.elapsed().as_secs_f64() });
        out
    }

    pub fn record_input(&mut self, path: &Path) -> Result<(), CliError> {
        let bytes = std::fs::read(path).map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
        self.input_checksums.insert(path.display().to_string(), hex::encode(Sha256::digest(&bytes)));
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut bytes = serde_json::to_vec_pretty(self).expect("manifest serializes");
        bytes.push(b'\n');
        bytes
    }
}
