//! Run record written next to every set of outputs.

use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Value};

use crate::config::RunConfig;

#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    /// SHA-256 of the resolved config; see [`RunConfig::digest`].
    pub config_digest: String,
    pub tool_version: String,
    pub command: String,
    pub seed: u64,
    /// Seconds since the Unix epoch. `SOURCE_DATE_EPOCH` pins it for reproducible builds.
    pub timestamp: u64,
    pub outputs: Vec<PathBuf>,
    pub config: Value,
}

impl RunManifest {
    pub fn new(cfg: &RunConfig, command: &str) -> Self {
        Self {
            config_digest: cfg.digest(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            seed: cfg.seed,
            timestamp: timestamp(),
            outputs: Vec::new(),
            config: cfg.canonical(),
        }
    }

    pub fn to_json(&self) -> String {
        let outputs: Vec<String> = self.outputs.iter().map(|p| p.display().to_string()).collect();
        let v = json!({
            "config_digest": self.config_digest,
            "tool_version": self.tool_version,
            "command": self.command,
            "seed": self.seed,
            "timestamp": self.timestamp,
            "outputs": outputs,
            "config": self.config,
        });
        let mut s = serde_json::to_string_pretty(&v).expect("manifest serializes");
        s.push('\n');
        s
    }
}

fn timestamp() -> u64 {
    if let Some(t) = std::env::var("SOURCE_DATE_EPOCH").ok().and_then(|s| s.parse().ok()) {
        return t;
    }
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}
