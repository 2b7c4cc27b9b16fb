use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::io::file_digest;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Record of one command run, written last so every file it lists exists.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config: BTreeMap<String, String>,
    pub seed: Option<u64>,
    pub inputs: Vec<InputDigest>,
    pub outputs: Vec<String>,
    pub wall_clock_seconds: f64,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: BTreeMap::new(),
            seed: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            wall_clock_seconds: 0.0,
        }
    }

    pub fn add_input(&mut self, path: &Path) -> Result<()> {
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: file_digest(path)?,
        });
        Ok(())
    }

    pub fn add_outputs<I: IntoIterator<Item = PathBuf>>(&mut self, paths: I) {
        self.outputs.extend(paths.into_iter().map(|p| p.display().to_string()));
    }

    /// Writes `manifest.json` into `dir` through a temporary file and a rename.
    pub fn write(mut self, dir: &Path, started: Instant) -> Result<PathBuf> {
        self.wall_clock_seconds = started.elapsed().as_secs_f64();
        for out in &self.outputs {
            if !Path::new(out).exists() {
                return Err(Error::invariant(format!("manifest names missing output {out}")));
            }
        }
        let json = serde_json::to_string_pretty(&self).expect("manifest serialises");
        let path = dir.join(MANIFEST_FILE);
        let tmp = dir.join(format!(".{MANIFEST_FILE}.tmp"));
        fs::write(&tmp, json + "\n").map_err(|e| Error::write(&tmp, e))?;
        fs::rename(&tmp, &path).map_err(|e| Error::write(&path, e))?;
        Ok(path)
    }
}
