//! Per-run manifest: resolved config, file hashes, timings, clamp counts.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub preset: Option<String>,
    pub config: RunConfig,
    pub threads: usize,
    /// SHA-256 of every emitted file, keyed by file name.
    pub files: BTreeMap<String, String>,
    /// Seconds per stage, in run order.
    pub timings: Vec<(String, f64)>,
    pub wall_clock: f64,
    pub clamp_events: u64,
    pub assumptions: Vec<String>,
    pub warnings: Vec<String>,
}

/// Collects outputs of one run and writes `manifest.json` at the end.
pub struct Recorder {
    dir: PathBuf,
    started: Instant,
    stage: Option<(String, Instant)>,
    pub manifest: RunManifest,
}

impl Recorder {
    pub fn new(dir: &Path, command: &str, preset: Option<&str>, config: &RunConfig, threads: usize) -> Result<Self, CliError> {
        fs::create_dir_all(dir)?;
        let mut config = config.clone();
        config.output.dir = None;
        Ok(Self {
            dir: dir.to_path_buf(),
            started: Instant::now(),
            stage: None,
            manifest: RunManifest {
                tool: "dtpt",
                version: env!("CARGO_PKG_VERSION"),
                command: command.to_string(),
                preset: preset.map(str::to_string),
                config,
                threads,
                files: BTreeMap::new(),
                timings: Vec::new(),
                wall_clock: 0.0,
                clamp_events: 0,
                assumptions: Vec::new(),
                warnings: Vec::new(),
            },
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// Close the running stage, if any, and start a new one.
    pub fn stage(&mut self, name: &str) {
        self.end_stage();
        self.stage = Some((name.to_string(), Instant::now()));
    }

    fn end_stage(&mut self) {
        if let Some((name, t)) = self.stage.take() {
            self.manifest.timings.push((name, t.elapsed().as_secs_f64()));
        }
    }

    pub fn warn(&mut self, message: impl Into<String>) {
        let m = message.into();
        eprintln!("warning: {m}");
        self.manifest.warnings.push(m);
    }

    /// Write `bytes` to `name` inside the output directory and hash it.
    pub fn emit(&mut self, name: &str, bytes: &[u8]) -> Result<(), CliError> {
        fs::write(self.dir.join(name), bytes)?;
        self.manifest.files.insert(name.to_string(), hex(&Sha256::digest(bytes)));
        Ok(())
    }

    pub fn emit_with(&mut self, name: &str, write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<(), CliError> {
        let mut buf = Vec::new();
        write(&mut buf)?;
        self.emit(name, &buf)
    }

    pub fn finish(mut self) -> Result<RunManifest, CliError> {
        self.end_stage();
        self.manifest.wall_clock = self.started.elapsed().as_secs_f64();
        let json = serde_json::to_string_pretty(&self.manifest).expect("manifest serializes");
        fs::write(self.dir.join("manifest.json"), json)?;
        Ok(self.manifest)
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
