use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Written next to every output file as `<output>.manifest.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seeds: Vec<u64>,
    pub inputs: Vec<String>,
    pub outputs: Vec<String>,
    pub tool_version: String,
    pub wall_clock_s: f64,
}

pub fn manifest_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = path
        .file_name()
        .with_context(|| format!("{} has no file name", path.display()))?
        .to_string_lossy();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    std::fs::write(&tmp, bytes).map_err(finegraph_core::Error::from)?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        finegraph_core::Error::from(e)
    })?;
    Ok(())
}

/// Collects a command's outputs and writes them with their manifests.
pub struct Recorder {
    command: String,
    config: serde_json::Value,
    seeds: Vec<u64>,
    inputs: Vec<String>,
    pending: Vec<(PathBuf, Vec<u8>)>,
    started: Instant,
}

impl Recorder {
    pub fn new(command: &str) -> Self {
        Recorder {
            command: command.into(),
            config: serde_json::Value::Null,
            seeds: Vec::new(),
            inputs: Vec::new(),
            pending: Vec::new(),
            started: Instant::now(),
        }
    }

    pub fn config<T: Serialize>(&mut self, cfg: &T) -> Result<()> {
        self.config = serde_json::to_value(cfg)?;
        Ok(())
    }

    pub fn seed(&mut self, s: u64) {
        self.seeds.push(s);
    }

    pub fn input(&mut self, p: &Path) {
        self.inputs.push(p.display().to_string());
    }

    pub fn output(&mut self, p: &Path, bytes: Vec<u8>) {
        self.pending.push((p.to_path_buf(), bytes));
    }

    pub fn finish(self) -> Result<()> {
        let manifest = RunManifest {
            command: self.command,
            config: self.config,
            seeds: self.seeds,
            inputs: self.inputs,
            outputs: self.pending.iter().map(|(p, _)| p.display().to_string()).collect(),
            tool_version: env!("CARGO_PKG_VERSION").into(),
            wall_clock_s: self.started.elapsed().as_secs_f64(),
        };
        let text = serde_json::to_vec_pretty(&manifest)?;
        for (path, bytes) in &self.pending {
            write_atomic(path, bytes)?;
            write_atomic(&manifest_path(path), &text)?;
        }
        Ok(())
    }
}
