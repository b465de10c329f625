//! Output directory handling: every command writes its files plus a
//! `<command>.manifest.json` recording their SHA-256 digests, and `--check`
//! re-hashes the files on disk against that record.

use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub arguments: Vec<String>,
    pub files: Vec<ManifestEntry>,
}

fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for b in digest {
        hex.push_str(&format!("{b:02x}"));
    }
    hex
}

/// Write `files` (name, content) into `out_dir` and record them in
/// `<command>.manifest.json`. The manifest is written last so a complete
/// manifest implies complete outputs.
pub fn write_outputs(
    out_dir: &Path,
    command: &str,
    arguments: &[String],
    files: &[(String, String)],
) -> Result<()> {
    fs::create_dir_all(out_dir)
        .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;
    let mut entries = Vec::with_capacity(files.len());
    for (name, content) in files {
        let path = out_dir.join(name);
        fs::write(&path, content).with_context(|| format!("cannot write {}", path.display()))?;
        entries.push(ManifestEntry {
            name: name.clone(),
            sha256: sha256_hex(content.as_bytes()),
            bytes: content.len(),
        });
    }
    let manifest = Manifest {
        command: command.to_owned(),
        arguments: arguments.to_vec(),
        files: entries,
    };
    let json = oblate_core::io::to_json_string(&manifest)? + "\n";
    let path = out_dir.join(format!("{command}.manifest.json"));
    fs::write(&path, json).with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

#[derive(Debug, PartialEq)]
pub enum FileCheck {
    Ok,
    Missing,
    Mismatch,
}

/// Re-hash every file listed in a command's manifest.
pub fn check_manifest(out_dir: &Path, command: &str) -> Result<Vec<(String, FileCheck)>> {
    let path = out_dir.join(format!("{command}.manifest.json"));
    let text = fs::read_to_string(&path)
        .with_context(|| format!("cannot read manifest {}", path.display()))?;
    let manifest: Manifest =
        serde_json::from_str(&text).with_context(|| format!("malformed {}", path.display()))?;
    let mut report = Vec::with_capacity(manifest.files.len());
    for entry in &manifest.files {
        let file = out_dir.join(&entry.name);
        let status = match fs::read(&file) {
            Err(_) => FileCheck::Missing,
            Ok(bytes) => {
                if sha256_hex(&bytes) == entry.sha256 && bytes.len() == entry.bytes {
                    FileCheck::Ok
                } else {
                    FileCheck::Mismatch
                }
            }
        };
        report.push((entry.name.clone(), status));
    }
    Ok(report)
}
