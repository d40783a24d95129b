//! Run manifests: resolved config plus SHA-256 digests of every file a
//! run read and wrote.

use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::{CliError, Coded};

#[derive(Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    pub config: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
}

pub fn sha256_file(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path).code("IO")?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

pub struct ManifestBuilder {
    subcommand: &'static str,
    config: serde_json::Value,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
}

impl ManifestBuilder {
    pub fn new<C: Serialize>(subcommand: &'static str, config: &C) -> Result<Self, CliError> {
        Ok(ManifestBuilder {
            subcommand,
            config: serde_json::to_value(config).code("CONFIG")?,
            inputs: Vec::new(),
            outputs: Vec::new(),
        })
    }

    pub fn input(&mut self, path: &Path) -> Result<(), CliError> {
        self.inputs.push(FileDigest {
            path: path.display().to_string(),
            sha256: sha256_file(path)?,
        });
        Ok(())
    }

    pub fn input_opt(&mut self, path: Option<&PathBuf>) -> Result<(), CliError> {
        if let Some(p) = path {
            self.input(p)?;
        }
        Ok(())
    }

    /// Record an output by its file name (paths inside the out dir stay
    /// relative so reruns into different directories compare equal).
    pub fn output(&mut self, path: &Path) -> Result<(), CliError> {
        let name = path
            .file_name()
            .map(|n| n.to_string_lossy().to_string())
            .unwrap_or_else(|| path.display().to_string());
        self.outputs.push(FileDigest { path: name, sha256: sha256_file(path)? });
        Ok(())
    }

    pub fn write(self, out_dir: &Path) -> Result<(), CliError> {
        let manifest = RunManifest {
            tool: "hostclass",
            version: env!("CARGO_PKG_VERSION"),
            subcommand: self.subcommand,
            config: self.config,
            inputs: self.inputs,
            outputs: self.outputs,
        };
        let mut text = serde_json::to_string_pretty(&manifest).code("IO")?;
        text.push('\n');
        std::fs::write(out_dir.join("run_manifest.json"), text).code("IO")
    }
}

/// Create the output directory and write `content` into `name` inside it.
pub fn write_output(out_dir: &Path, name: &str, content: &str) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(out_dir).code("IO")?;
    let path = out_dir.join(name);
    std::fs::write(&path, content).code("IO")?;
    Ok(path)
}
