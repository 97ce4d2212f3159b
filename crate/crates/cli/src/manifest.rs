use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

use crate::args::Cli;

/// Everything needed to rerun a command: the parsed invocation, the resolved
/// settings it ran with and the files it wrote. No timestamps, so reruns
/// produce the same manifest.
#[derive(Serialize)]
pub struct Manifest<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub invocation: &'a Cli,
    pub resolved: Value,
    pub outputs: Vec<PathBuf>,
}

impl<'a> Manifest<'a> {
    pub fn new(cli: &'a Cli) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            seed: cli.seed,
            invocation: cli,
            resolved: Value::Null,
            outputs: Vec::new(),
        }
    }

    pub fn write(&self, name: &str) -> Result<PathBuf> {
        let path = self
            .invocation
            .out_dir
            .join(format!("manifest-{name}.json"));
        write_file(&path, serde_json::to_string_pretty(self)?.as_bytes())?;
        Ok(path)
    }
}

pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}
