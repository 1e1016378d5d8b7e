//! Configuration, CSV payloads and the per-command result envelope.

mod config;
mod csv;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub use config::{DeviceSection, DmSection, DriveSection, GridSection, MethodName, OutputSection, RunConfig, SweepSection};
pub use csv::{
    bench_tables, coupling_table, emit_csv, fmt_float, key_values, leakage_map_table, level_map_table, read_leakage_map,
    spectrum_table, trace_table, trajectory_table, write_text, CsvTable, FloatFormat, MAP_HEADER,
};

use crate::error::{Error, Result};

pub const CONFIG_ECHO: &str = "config.normalized.toml";

pub fn config_hash(normalized: &str) -> String {
    Sha256::digest(normalized.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Metadata written next to the payload of every command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultEnvelope {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub method: String,
    pub config_hash: String,
    pub config: String,
    pub wall_seconds: f64,
    /// Payload files, relative to the output directory.
    pub outputs: Vec<String>,
}

impl ResultEnvelope {
    pub fn new(command: &str, method: &str, cfg: &RunConfig) -> Self {
        let config = cfg.normalized();
        ResultEnvelope {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            method: method.to_string(),
            config_hash: config_hash(&config),
            config,
            wall_seconds: 0.0,
            outputs: Vec::new(),
        }
    }

    pub fn file_name(command: &str) -> String {
        format!("{command}.envelope.json")
    }

    /// Writes the envelope and the normalised config echo into `dir`.
    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        write_text(&dir.join(CONFIG_ECHO), &self.config)?;
        let path = dir.join(Self::file_name(&self.command));
        let json = serde_json::to_string_pretty(self).map_err(|e| Error::Io { path: path.display().to_string(), reason: e.to_string() })?;
        write_text(&path, &(json + "\n"))?;
        Ok(path)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let io = |e: String| Error::Io { path: path.display().to_string(), reason: e };
        let text = std::fs::read_to_string(path).map_err(|e| io(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| io(e.to_string()))
    }
}

pub fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.display().to_string(), reason: e.to_string() })
}
