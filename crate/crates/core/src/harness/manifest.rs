use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Path relative to the output directory, `/`-separated.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedFailure {
    pub context: String,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub preset: String,
    pub output_dir: PathBuf,
    /// Configuration snapshot.
    pub config: serde_json::Value,
    pub files: Vec<FileEntry>,
    pub failures: Vec<SeedFailure>,
    pub wall_clock_s: f64,
    pub versions: BTreeMap<String, String>,
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Write `bytes` to `dir/rel`, creating parent directories.
pub(crate) fn write_file(dir: &Path, rel: &str, bytes: &[u8]) -> Result<FileEntry> {
    let path = dir.join(rel);
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    Ok(FileEntry {
        path: rel.to_string(),
        sha256: sha256_hex(bytes),
        bytes: bytes.len() as u64,
    })
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }

    pub fn save(&self) -> Result<()> {
        let path = self.output_dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Parse(e.to_string()))?;
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
    }

    pub fn file(&self, rel: &str) -> Option<&FileEntry> {
        self.files.iter().find(|f| f.path == rel)
    }

    pub fn read(&self, rel: &str) -> Result<Vec<u8>> {
        let path = self.output_dir.join(rel);
        fs::read(&path).map_err(|e| Error::io(&path, e))
    }

    /// Check that every file under the output directory (other than the
    /// manifest) is listed with a matching checksum, and vice versa.
    pub fn verify(&self) -> Result<()> {
        let mut on_disk = Vec::new();
        collect_files(&self.output_dir, &self.output_dir, &mut on_disk)?;
        on_disk.retain(|p| p != MANIFEST_FILE);
        on_disk.sort();
        let mut listed: Vec<String> = self.files.iter().map(|f| f.path.clone()).collect();
        listed.sort();
        if on_disk != listed {
            return Err(Error::Parse(format!(
                "manifest lists {} files but {} are on disk",
                listed.len(),
                on_disk.len()
            )));
        }
        for f in &self.files {
            let bytes = self.read(&f.path)?;
            if sha256_hex(&bytes) != f.sha256 {
                return Err(Error::Parse(format!("checksum mismatch for {}", f.path)));
            }
        }
        Ok(())
    }
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<String>) -> Result<()> {
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        let path = entry.path();
        if path.is_dir() {
            collect_files(root, &path, out)?;
        } else {
            let rel = path.strip_prefix(root).expect("walk stays under root");
            out.push(rel.components().map(|c| c.as_os_str().to_string_lossy()).collect::<Vec<_>>().join("/"));
        }
    }
    Ok(())
}
