//! Run manifests: what a command read, what it wrote, and with which
//! settings.

use std::path::PathBuf;

use mattolab::GlobalConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Build,
    Matto,
    IsMatto,
    Recover,
    Crofoot,
    Tau,
    Verify,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Command,
    pub rng_seed: u64,
    /// Absent for `verify`, which builds a configuration per instance.
    pub cfg: Option<GlobalConfig>,
    pub inputs: Vec<Artifact>,
    pub emitted: Vec<Artifact>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

impl RunManifest {
    /// Inputs are digested from disk; unreadable ones get an empty digest.
    pub fn new(
        command: Command,
        seed: u64,
        cfg: Option<GlobalConfig>,
        inputs: &[PathBuf],
        emitted: &[(PathBuf, String)],
    ) -> Self {
        let inputs = inputs
            .iter()
            .map(|p| Artifact {
                path: p.display().to_string(),
                sha256: std::fs::read(p).map(|b| sha256_hex(&b)).unwrap_or_default(),
            })
            .collect();
        let emitted = emitted
            .iter()
            .map(|(p, contents)| Artifact {
                path: p.display().to_string(),
                sha256: sha256_hex(contents.as_bytes()),
            })
            .collect();
        Self {
            command,
            rng_seed: seed,
            cfg,
            inputs,
            emitted,
        }
    }
}
