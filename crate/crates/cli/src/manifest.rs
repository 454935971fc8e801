//! Run manifest written next to every set of outputs.

use std::fs;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ScenarioConfig;
use crate::error::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub command: String,
    pub config_sha256: String,
    pub seed: u64,
    pub threads: usize,
    pub versions: Versions,
    pub outputs: Vec<String>,
    pub config: serde_json::Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct Versions {
    pub shortpath_cli: &'static str,
    pub shortpath_core: &'static str,
}

pub fn config_hash(cfg: &ScenarioConfig) -> String {
    hex::encode(Sha256::digest(cfg.canonical_json().as_bytes()))
}

impl Manifest {
    pub fn new(command: &str, cfg: &ScenarioConfig, threads: usize, outputs: Vec<String>) -> Self {
        Self {
            command: command.to_string(),
            config_sha256: config_hash(cfg),
            seed: cfg.seed,
            threads,
            versions: Versions {
                shortpath_cli: env!("CARGO_PKG_VERSION"),
                shortpath_core: shortpath::VERSION,
            },
            outputs,
            config: serde_json::from_str(&cfg.canonical_json()).expect("config is valid JSON"),
        }
    }

    pub fn write(&self, dir: &Path) -> Result<String, CliError> {
        let name = format!("manifest_{}.json", self.command);
        let text = serde_json::to_string_pretty(self).expect("manifest serialises");
        fs::write(dir.join(&name), text + "\n")?;
        Ok(name)
    }
}
