//! Header lines that tie every output file to the tool version, the run
//! configuration and the exact input bytes.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const TOOL: &str = "glsn";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InputHash {
    /// File name without directories, so relocating inputs keeps outputs identical.
    pub file: String,
    pub sha256: String,
}

impl InputHash {
    pub fn of(path: &Path, bytes: &[u8]) -> InputHash {
        InputHash {
            file: path
                .file_name()
                .map(|n| n.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string()),
            sha256: sha256_hex(bytes),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Provenance {
    pub config_hash: String,
    pub inputs: Vec<InputHash>,
}

impl Provenance {
    /// `config` must not contain paths: it is hashed as canonical JSON.
    pub fn new(config: &Value, inputs: Vec<InputHash>) -> Provenance {
        Provenance {
            config_hash: sha256_hex(config.to_string().as_bytes())[..16].to_string(),
            inputs,
        }
    }

    pub fn header(&self) -> String {
        let inputs: Vec<String> = self.inputs.iter().map(|i| format!("{}:{}", i.file, i.sha256)).collect();
        format!(
            "# {TOOL} {VERSION} config={} inputs={}\n",
            self.config_hash,
            inputs.join(",")
        )
    }

    pub fn to_json(&self) -> Value {
        json!({
            "tool": TOOL,
            "version": VERSION,
            "config_hash": self.config_hash,
            "inputs": self.inputs.iter().map(|i| json!({"file": i.file, "sha256": i.sha256})).collect::<Vec<_>>(),
        })
    }
}

/// An output directory whose files all start with the provenance header.
pub struct OutputDir {
    dir: PathBuf,
    provenance: Provenance,
}

impl OutputDir {
    pub fn create(dir: &Path, provenance: Provenance) -> Result<OutputDir> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(OutputDir {
            dir: dir.to_path_buf(),
            provenance,
        })
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Runs a CSV writer into a buffer that already holds the header line.
    pub fn write_csv<F>(&self, name: &str, write: F) -> Result<()>
    where
        F: FnOnce(&mut Vec<u8>) -> glsn_core::Result<()>,
    {
        let mut buf = self.provenance.header().into_bytes();
        write(&mut buf).with_context(|| format!("writing {name}"))?;
        self.write_bytes(name, &buf)
    }

    pub fn write_text(&self, name: &str, text: &str) -> Result<()> {
        let mut buf = self.provenance.header().into_bytes();
        buf.extend_from_slice(text.as_bytes());
        self.write_bytes(name, &buf)
    }

    /// JSON cannot hold comments, so the provenance goes in a top-level field.
    pub fn write_json(&self, name: &str, mut value: Value) -> Result<()> {
        if let Value::Object(map) = &mut value {
            map.insert("provenance".into(), self.provenance.to_json());
        }
        let mut text = serde_json::to_string_pretty(&value)?;
        text.push('\n');
        self.write_bytes(name, text.as_bytes())
    }

    fn write_bytes(&self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.path(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))
    }
}
