use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::Value;

use crate::{CliError, Result};

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub subcommand: String,
    pub config: Value,
    pub started_unix_ms: u128,
    pub finished_unix_ms: u128,
    pub version: String,
    pub outputs: Vec<String>,
    pub notes: Vec<String>,
}

pub(crate) fn now_ms() -> u128 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis())
        .unwrap_or(0)
}

impl RunManifest {
    pub(crate) fn start(subcommand: &str, command_line: Vec<String>, config: Value) -> Self {
        RunManifest {
            command_line,
            subcommand: subcommand.to_string(),
            config,
            started_unix_ms: now_ms(),
            finished_unix_ms: 0,
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub(crate) fn output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    pub(crate) fn finish(mut self, out_dir: &Path) -> Result<PathBuf> {
        self.finished_unix_ms = now_ms();
        let path = out_dir.join(format!("{}.manifest.json", self.subcommand));
        let text = serde_json::to_string_pretty(&self)
            .map_err(|e| CliError::Validation(format!("manifest serialization: {e}")))?;
        fs::write(&path, text + "\n").map_err(CliError::io(&path))?;
        Ok(path)
    }
}
