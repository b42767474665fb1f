//! Run manifests: config hash, tool versions, checksummed file lists.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nls_core::diagnostics::Verdict;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::output::{read_json, write_json};
use crate::{LabError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the run directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub versions: BTreeMap<String, String>,
    pub inputs: Vec<FileEntry>,
    pub outputs: Vec<FileEntry>,
    #[serde(default)]
    pub verdicts: BTreeMap<String, Verdict>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn entry(dir: &Path, rel: &str) -> Result<FileEntry> {
    let bytes = fs::read(dir.join(rel)).map_err(|e| LabError::Data(format!("{rel}: {e}")))?;
    Ok(FileEntry { path: rel.to_string(), sha256: sha256_hex(&bytes), bytes: bytes.len() as u64 })
}

impl RunManifest {
    pub fn new(config_toml: &str) -> Self {
        let versions = [("nls-core", nls_core_version()), ("nls-lab", env!("CARGO_PKG_VERSION"))]
            .into_iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        Self {
            config_hash: sha256_hex(config_toml.as_bytes()),
            versions,
            inputs: Vec::new(),
            outputs: Vec::new(),
            verdicts: BTreeMap::new(),
        }
    }

    /// Adds or refreshes an output entry.
    pub fn record_output(&mut self, dir: &Path, rel: &str) -> Result<()> {
        let e = entry(dir, rel)?;
        match self.outputs.iter_mut().find(|o| o.path == rel) {
            Some(o) => *o = e,
            None => self.outputs.push(e),
        }
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        read_json(&dir.join(MANIFEST_FILE))
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        write_json(&dir.join(MANIFEST_FILE), self)
    }

    /// Every listed file exists and matches its checksum.
    pub fn verify(&self, dir: &Path) -> Result<()> {
        for e in self.inputs.iter().chain(&self.outputs) {
            let now = entry(dir, &e.path)?;
            if now.sha256 != e.sha256 {
                return Err(LabError::Data(format!("{}: checksum mismatch", e.path)));
            }
        }
        Ok(())
    }
}

fn nls_core_version() -> &'static str {
    // Both crates share the workspace version.
    env!("CARGO_PKG_VERSION")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verify_catches_tampering() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a.txt"), "hello").unwrap();
        let mut m = RunManifest::new("x = 1");
        m.record_output(dir.path(), "a.txt").unwrap();
        assert_eq!(m.outputs[0].sha256, "2cf24dba5fb0a30e26e83b2ac5b9e29e1b161e5c1fa7425e73043362938b9824");
        m.verify(dir.path()).unwrap();
        m.save(dir.path()).unwrap();
        assert_eq!(RunManifest::load(dir.path()).unwrap(), m);
        fs::write(dir.path().join("a.txt"), "hellO").unwrap();
        assert!(m.verify(dir.path()).is_err());
        fs::remove_file(dir.path().join("a.txt")).unwrap();
        assert!(m.verify(dir.path()).is_err());
    }
}
