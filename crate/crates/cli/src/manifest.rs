//! Run manifests: everything needed to reproduce a run's outputs.

use std::path::Path;

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub role: String,
    /// Path as given on the command line.
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    /// Fully defaulted arguments of the subcommand.
    pub config: serde_json::Value,
    pub inputs: Vec<InputDigest>,
    /// Output file names, relative to the output directory.
    pub outputs: Vec<String>,
    pub seed: Option<u64>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading manifest {}", path.display()))?;
        let manifest: RunManifest = serde_json::from_str(&text)
            .map_err(|e| CliError::Input(format!("invalid manifest {}: {e}", path.display())))?;
        if manifest.tool != env!("CARGO_BIN_NAME") {
            return Err(CliError::Input(format!(
                "manifest was written by {:?}, not {}",
                manifest.tool,
                env!("CARGO_BIN_NAME")
            ))
            .into());
        }
        Ok(manifest)
    }

    /// Fails if any recorded input no longer has the recorded digest.
    pub fn verify_inputs(&self) -> Result<()> {
        for input in &self.inputs {
            let now = digest_file(Path::new(&input.path), &input.role)?;
            if now.sha256 != input.sha256 {
                return Err(CliError::Input(format!(
                    "{} input {} changed since the manifest was written",
                    input.role, input.path
                ))
                .into());
            }
        }
        Ok(())
    }
}

pub fn digest_file(path: &Path, role: &str) -> Result<InputDigest> {
    let bytes =
        std::fs::read(path).with_context(|| format!("reading {role} input {}", path.display()))?;
    Ok(InputDigest {
        role: role.to_owned(),
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}
