//! Output directory bookkeeping and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};

use ductwarp::waveform::sidecar_path;
use ductwarp::Waveform;
use serde::Serialize;
use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Serialize)]
struct FileEntry {
    path: String,
    sha256: String,
    bytes: u64,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    inputs: &'a [FileEntry],
    parameters: &'a Map<String, Value>,
    outputs: &'a [FileEntry],
}

/// Collects inputs, parameters and outputs of one invocation and writes
/// `manifest.json` next to the artifacts.
pub struct Run {
    command: String,
    out_dir: PathBuf,
    inputs: Vec<FileEntry>,
    parameters: Map<String, Value>,
    outputs: Vec<FileEntry>,
}

fn hash(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

impl Run {
    pub fn new(command: &str, out_dir: &Path) -> Result<Self> {
        fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
        Ok(Self {
            command: command.to_string(),
            out_dir: out_dir.to_path_buf(),
            inputs: Vec::new(),
            parameters: Map::new(),
            outputs: Vec::new(),
        })
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }

    /// Reads an input file and records its hash.
    pub fn read_input(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        self.record_input(path, &bytes);
        Ok(bytes)
    }

    pub fn read_input_text(&mut self, path: &Path) -> Result<String> {
        let bytes = self.read_input(path)?;
        String::from_utf8(bytes).map_err(|_| CliError::input(format!("{}: not UTF-8 text", path.display())))
    }

    fn record_input(&mut self, path: &Path, bytes: &[u8]) {
        let name = path.display().to_string();
        if self.inputs.iter().all(|e| e.path != name) {
            self.inputs.push(FileEntry {
                path: name,
                sha256: hash(bytes),
                bytes: bytes.len() as u64,
            });
        }
    }

    /// Loads a waveform (raw + sidecar or WAV), hashing every file it touched.
    pub fn read_waveform(&mut self, path: &Path) -> Result<Waveform> {
        let w = Waveform::read_any(path).map_err(|e| CliError::file(path, e))?;
        for p in [path.to_path_buf(), sidecar_path(path)] {
            if let Ok(bytes) = fs::read(&p) {
                self.record_input(&p, &bytes);
            }
        }
        Ok(w)
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).unwrap_or(Value::Null);
        self.parameters.insert(key.to_string(), v);
    }

    /// Records every field of a serializable parameter struct.
    pub fn params(&mut self, value: impl Serialize) {
        if let Ok(Value::Object(map)) = serde_json::to_value(value) {
            self.parameters.extend(map);
        }
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        self.outputs.push(FileEntry {
            path: name.to_string(),
            sha256: hash(bytes),
            bytes: bytes.len() as u64,
        });
        Ok(path)
    }

    pub fn write_text(&mut self, name: &str, text: &str) -> Result<PathBuf> {
        self.write(name, text.as_bytes())
    }

    /// Writes `name` as raw little-endian f32 plus its JSON sidecar.
    pub fn write_waveform(&mut self, name: &str, w: &Waveform) -> Result<PathBuf> {
        let path = self.out_dir.join(name);
        w.write_raw(&path)?;
        for p in [path.clone(), sidecar_path(&path)] {
            let bytes = fs::read(&p).map_err(|e| CliError::io(&p, e))?;
            let rel = p
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_default();
            self.outputs.push(FileEntry {
                path: rel,
                sha256: hash(&bytes),
                bytes: bytes.len() as u64,
            });
        }
        Ok(path)
    }

    pub fn finish(self) -> Result<PathBuf> {
        let manifest = Manifest {
            tool: "ductwarp",
            version: env!("CARGO_PKG_VERSION"),
            command: &self.command,
            inputs: &self.inputs,
            parameters: &self.parameters,
            outputs: &self.outputs,
        };
        let mut text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| CliError::input(format!("manifest: {e}")))?;
        text.push('\n');
        let path = self.out_dir.join(MANIFEST);
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}
