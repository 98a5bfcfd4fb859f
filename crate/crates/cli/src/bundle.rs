//! In-memory artifact sets and their atomic, digest-listed materialization.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::AppliedDefault;
use crate::error::{CliError, Result};

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

/// Named artifacts in insertion order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Bundle {
    artifacts: Vec<Artifact>,
}

impl Bundle {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, bytes: impl Into<Vec<u8>>) {
        let name = name.into();
        debug_assert!(self.get(&name).is_none(), "duplicate artifact {name}");
        self.artifacts.push(Artifact {
            name,
            bytes: bytes.into(),
        });
    }

    /// Pretty JSON with a trailing newline.
    pub fn push_json<T: Serialize>(&mut self, name: impl Into<String>, value: &T) {
        let mut bytes = serde_json::to_vec_pretty(value).expect("artifact serializes to JSON");
        bytes.push(b'\n');
        self.push(name, bytes);
    }

    pub fn extend(&mut self, other: Bundle) {
        for a in other.artifacts {
            self.push(a.name, a.bytes);
        }
    }

    pub fn get(&self, name: &str) -> Option<&[u8]> {
        self.artifacts
            .iter()
            .find(|a| a.name == name)
            .map(|a| a.bytes.as_slice())
    }

    pub fn names(&self) -> Vec<&str> {
        self.artifacts.iter().map(|a| a.name.as_str()).collect()
    }

    pub fn artifacts(&self) -> &[Artifact] {
        &self.artifacts
    }

    pub fn len(&self) -> usize {
        self.artifacts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.artifacts.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub created_unix_s: u64,
    /// Keys filled from defaults, with their values.
    pub defaults_applied: Vec<ManifestDefault>,
    /// Command-line overrides applied after parsing.
    pub overrides: Vec<String>,
    pub artifacts: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestDefault {
    pub path: String,
    pub value: String,
}

impl From<&AppliedDefault> for ManifestDefault {
    fn from(d: &AppliedDefault) -> Self {
        Self {
            path: d.path.clone(),
            value: d.value.clone(),
        }
    }
}

/// Provenance recorded alongside a bundle.
#[derive(Debug, Clone, Default)]
pub struct RunInfo {
    pub command: String,
    pub defaults_applied: Vec<AppliedDefault>,
    pub overrides: Vec<String>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Writes `bytes` to a temporary sibling and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let file_name = path
        .file_name()
        .ok_or_else(|| CliError::io(path, std::io::Error::other("not a file path")))?;
    let tmp = dir.join(format!(".{}.{}.tmp", file_name.to_string_lossy(), std::process::id()));
    let write = || -> std::io::Result<()> {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    };
    write().map_err(|e| {
        let _ = fs::remove_file(&tmp);
        CliError::io(path, e)
    })
}

/// Writes every artifact into `dir`, then the manifest.
pub fn write_bundle(dir: &Path, bundle: &Bundle, info: &RunInfo) -> Result<(PathBuf, Manifest)> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut entries = Vec::with_capacity(bundle.len());
    for a in bundle.artifacts() {
        write_atomic(&dir.join(&a.name), &a.bytes)?;
        entries.push(ManifestEntry {
            file: a.name.clone(),
            bytes: a.bytes.len() as u64,
            sha256: sha256_hex(&a.bytes),
        });
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: info.command.clone(),
        created_unix_s: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0),
        defaults_applied: info.defaults_applied.iter().map(ManifestDefault::from).collect(),
        overrides: info.overrides.clone(),
        artifacts: entries,
    };
    let path = dir.join(MANIFEST_NAME);
    let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    bytes.push(b'\n');
    write_atomic(&path, &bytes)?;
    Ok((path, manifest))
}
