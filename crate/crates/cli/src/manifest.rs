//! Deterministic run manifests.
//!
//! Every artifact-producing run writes `manifest.json` beside its outputs:
//! the subcommand, the fully resolved configuration, the seed when one
//! applies, and a content hash per artifact. Identical (command, config,
//! seed) runs reproduce identical manifests byte for byte.

use asgpose_core::{Error, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub artifacts: BTreeMap<String, String>,
}

pub fn sha256_hex(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path)?;
    let digest = Sha256::digest(&bytes);
    Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
}

/// Hashes the artifacts (keyed by path relative to the manifest directory)
/// and writes `manifest.json` there.
pub fn write_manifest(
    command: &str,
    config: &BTreeMap<String, String>,
    seed: Option<u64>,
    artifacts: &[PathBuf],
) -> Result<Option<PathBuf>> {
    let Some(first) = artifacts.first() else {
        return Ok(None);
    };
    let dir = first
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("."));
    let mut hashed = BTreeMap::new();
    for artifact in artifacts {
        let key = artifact
            .strip_prefix(&dir)
            .map(|p| p.display().to_string())
            .unwrap_or_else(|_| {
                artifact
                    .file_name()
                    .map(|n| n.to_string_lossy().into_owned())
                    .unwrap_or_else(|| artifact.display().to_string())
            });
        hashed.insert(key, sha256_hex(artifact)?);
    }
    let manifest = RunManifest {
        command: command.to_string(),
        config: config.clone(),
        seed,
        artifacts: hashed,
    };
    let path = dir.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Validation(format!("manifest serialization: {e}")))?;
    std::fs::write(&path, text + "\n")?;
    Ok(Some(path))
}
