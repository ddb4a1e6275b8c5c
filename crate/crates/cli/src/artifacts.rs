//! File plumbing shared by every command: hashed inputs, atomic outputs and
//! the run manifest.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::CliError;

pub const TOOL_VERSION: &str = concat!("ropuf ", env!("CARGO_PKG_VERSION"));

pub fn sha256_ref(bytes: &[u8]) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(bytes)))
}

/// Everything needed to reproduce a command's outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: serde_json::Value,
    pub seed: Option<u64>,
    pub inputs: BTreeMap<String, String>,
    pub tool_version: String,
    pub outputs: Vec<String>,
}

/// Tracks the files a command reads and writes.
pub struct Run {
    command: &'static str,
    parameters: serde_json::Value,
    seed: Option<u64>,
    inputs: BTreeMap<String, String>,
    outputs: Vec<String>,
}

impl Run {
    pub fn new(command: &'static str, parameters: &impl Serialize, seed: Option<u64>) -> Self {
        Self {
            command,
            parameters: serde_json::to_value(parameters).expect("serializable parameters"),
            seed,
            inputs: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    pub fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Data(format!("cannot read {}: {e}", path.display())))?;
        self.inputs.insert(path.display().to_string(), sha256_ref(&bytes));
        String::from_utf8(bytes)
            .map_err(|_| CliError::Data(format!("{} is not UTF-8 text", path.display())))
    }

    pub fn write(&mut self, path: &Path, contents: &[u8]) -> Result<(), CliError> {
        write_atomic(path, contents)?;
        self.outputs.push(path.display().to_string());
        Ok(())
    }

    /// Writes the manifest to `path` and returns it.
    pub fn finish(self, path: &Path) -> Result<RunManifest, CliError> {
        let manifest = RunManifest {
            command: self.command.to_string(),
            parameters: self.parameters,
            seed: self.seed,
            inputs: self.inputs,
            tool_version: TOOL_VERSION.to_string(),
            outputs: self.outputs,
        };
        let mut text = serde_json::to_string_pretty(&manifest).expect("serializable manifest");
        text.push('\n');
        write_atomic(path, text.as_bytes())?;
        Ok(manifest)
    }
}

/// Writes through a temporary file in the target directory, so a failed
/// write never leaves a partial file behind.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let fail = |e: &dyn std::fmt::Display| CliError::Data(format!("cannot write {}: {e}", path.display()));
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut builder = tempfile::Builder::new();
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        builder.permissions(std::fs::Permissions::from_mode(0o644));
    }
    let mut tmp = builder.tempfile_in(dir).map_err(|e| fail(&e))?;
    tmp.write_all(contents).map_err(|e| fail(&e))?;
    tmp.as_file().sync_all().map_err(|e| fail(&e))?;
    tmp.persist(path).map_err(|e| fail(&e.error))?;
    Ok(())
}

/// `<file>.manifest.json` next to a single-file output.
pub fn manifest_path_for(file: &Path) -> PathBuf {
    let mut name = file.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Data(format!("cannot create {}: {e}", dir.display())))
}

pub fn json_line(value: &impl Serialize) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    text.into_bytes()
}
