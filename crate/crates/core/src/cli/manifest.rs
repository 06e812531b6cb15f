use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Record of one CLI invocation, written next to its outputs.
#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    /// SHA-256 of the input file, if one was read.
    pub config_hash: Option<String>,
    pub seed: Option<u64>,
    pub version: String,
    pub wall_time_ms: u128,
    pub outputs: Vec<PathBuf>,
    pub exit_code: i32,
}

pub fn hash_file(path: &Path) -> std::io::Result<String> {
    let bytes = std::fs::read(path)?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

/// `<output>.manifest.json` when there is a primary output, else
/// `hardgrid.manifest.json` in the working directory.
pub fn default_path(primary_output: Option<&Path>) -> PathBuf {
    match primary_output {
        Some(p) => {
            let mut s = p.as_os_str().to_owned();
            s.push(".manifest.json");
            PathBuf::from(s)
        }
        None => PathBuf::from("hardgrid.manifest.json"),
    }
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> std::io::Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        std::fs::write(path, text)
    }
}
