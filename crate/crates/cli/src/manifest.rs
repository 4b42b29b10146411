use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputDigest {
    /// File path, or `-` for standard output.
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub argv: Vec<String>,
    pub seed: Option<u64>,
    pub engine_version: String,
    pub timestamp_unix: u64,
    pub outputs: Vec<OutputDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub fn new(command: &str, argv: &[String], seed: Option<u64>) -> Self {
        RunManifest {
            command: command.to_string(),
            argv: argv.to_vec(),
            seed,
            engine_version: wpspine::VERSION.to_string(),
            timestamp_unix: SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0),
            outputs: Vec::new(),
        }
    }

    pub fn record(&mut self, path: &str, bytes: &[u8]) {
        self.outputs.push(OutputDigest { path: path.to_string(), sha256: sha256_hex(bytes) });
    }

    /// `run.json` in the directory of `output`.
    pub fn path_beside(output: &Path) -> PathBuf {
        output.parent().map(|p| p.to_path_buf()).unwrap_or_default().join("run.json")
    }
}
