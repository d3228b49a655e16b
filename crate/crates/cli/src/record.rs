//! Output bookkeeping: every subcommand writes its files through a `Run`,
//! which then emits `run-<subcommand>.json` listing inputs and outputs.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use vibforge::hashing::{sha256_file, sha256_hex};

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Serialize)]
pub struct RunRecord<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'a str,
    pub seed: u64,
    pub config_hash: String,
    pub config: &'a ExperimentConfig,
    /// Input path -> SHA-256 of its bytes.
    pub inputs: &'a BTreeMap<String, String>,
    /// Output paths relative to the output directory.
    pub outputs: &'a [String],
}

pub struct Run<'a> {
    pub config: &'a ExperimentConfig,
    subcommand: &'static str,
    inputs: BTreeMap<String, String>,
    outputs: Vec<String>,
}

impl<'a> Run<'a> {
    pub fn new(config: &'a ExperimentConfig, subcommand: &'static str) -> Self {
        Self {
            config,
            subcommand,
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    pub fn out_dir(&self) -> &Path {
        &self.config.output_dir
    }

    pub fn out_path(&self, rel: &str) -> PathBuf {
        self.config.output_dir.join(rel)
    }

    /// Reads an input file and records its hash.
    pub fn read_input(&mut self, path: &Path) -> CliResult<Vec<u8>> {
        let bytes = std::fs::read(path).map_err(|e| missing(path, e))?;
        self.inputs
            .insert(path.display().to_string(), sha256_hex(&bytes));
        Ok(bytes)
    }

    /// Records the hash of an input file read elsewhere.
    pub fn note_input(&mut self, path: &Path) -> CliResult<()> {
        let hash = sha256_file(path).map_err(|e| missing(path, e))?;
        self.inputs.insert(path.display().to_string(), hash);
        Ok(())
    }

    /// Writes `bytes` to `rel` under the output directory, creating parents.
    pub fn write(&mut self, rel: &str, bytes: &[u8]) -> CliResult<PathBuf> {
        let path = self.out_path(rel);
        write_file(&path, bytes)?;
        self.outputs.push(rel.to_string());
        Ok(path)
    }

    /// Records a file written by library code.
    pub fn note_output(&mut self, path: &Path) {
        let shown = path
            .strip_prefix(&self.config.output_dir)
            .unwrap_or(path)
            .display()
            .to_string();
        self.outputs.push(shown);
    }

    /// Writes `run-<subcommand>.json` and returns its path.
    pub fn finish(self) -> CliResult<PathBuf> {
        let record = RunRecord {
            tool: "vibforge",
            version: TOOL_VERSION,
            subcommand: self.subcommand,
            seed: self.config.seed,
            config_hash: self.config.hash(),
            config: self.config,
            inputs: &self.inputs,
            outputs: &self.outputs,
        };
        let mut json = serde_json::to_vec_pretty(&record).expect("run record serializes");
        json.push(b'\n');
        let path = self.out_path(&format!("run-{}.json", self.subcommand));
        write_file(&path, &json)?;
        Ok(path)
    }
}

fn missing(path: &Path, e: std::io::Error) -> CliError {
    CliError::data("INPUT", format!("{}: {e}", path.display()))
}

pub fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let fail = |e: std::io::Error| CliError::internal("OUTPUT", format!("{}: {e}", path.display()));
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(fail)?;
    }
    std::fs::write(path, bytes).map_err(fail)
}
