//! Run metadata embedded in every output: the full configuration and a
//! SHA-256 digest of each input, so identical runs produce identical bytes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Reads an input file and records its digest.
pub fn read_input(path: &Path) -> Result<(Vec<u8>, InputDigest), CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    let digest = InputDigest {
        path: path.display().to_string(),
        sha256: format!("{:x}", Sha256::digest(&bytes)),
    };
    Ok((bytes, digest))
}

pub struct RunMeta {
    command: &'static str,
    config: Value,
    inputs: Vec<InputDigest>,
}

impl RunMeta {
    pub fn new(command: &'static str, config: &impl Serialize, inputs: Vec<InputDigest>) -> Self {
        RunMeta {
            command,
            config: serde_json::to_value(config).expect("configuration serialises"),
            inputs,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "tool": "mogen",
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "config": self.config,
            "inputs": self.inputs,
        })
    }

    /// `#` comment lines carrying the metadata, placed before a CSV header
    /// or a path file.
    pub fn comment_block(&self) -> String {
        let mut out = format!("# mogen {} {}\n", env!("CARGO_PKG_VERSION"), self.command);
        out.push_str(&format!("# config {}\n", self.config));
        for i in &self.inputs {
            out.push_str(&format!("# input {} sha256 {}\n", i.path, i.sha256));
        }
        out
    }
}

/// Output directory handle; creates the directory on first use.
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn new(root: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(root).map_err(|e| CliError::Data(format!("{}: {e}", root.display())))?;
        Ok(OutDir {
            root: root.to_path_buf(),
        })
    }

    pub fn write(&self, name: &str, bytes: &[u8]) -> Result<PathBuf, CliError> {
        let path = self.root.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::Data(format!("{}: {e}", parent.display())))?;
        }
        fs::write(&path, bytes).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    /// `{"meta": ..., <key>: body}` pretty-printed with sorted keys.
    pub fn write_json(&self, name: &str, meta: &RunMeta, key: &str, body: Value) -> Result<PathBuf, CliError> {
        let doc = json!({ "meta": meta.to_json(), key: body });
        let mut text = serde_json::to_string_pretty(&doc).expect("json serialises");
        text.push('\n');
        self.write(name, text.as_bytes())
    }

    /// CSV produced by `fill`, preceded by the metadata comment block.
    pub fn write_csv(
        &self,
        name: &str,
        meta: &RunMeta,
        fill: impl FnOnce(&mut Vec<u8>) -> mogen_core::Result<()>,
    ) -> Result<PathBuf, CliError> {
        let mut bytes = meta.comment_block().into_bytes();
        fill(&mut bytes)?;
        self.write(name, &bytes)
    }
}

/// File-system-safe rendering of a node label.
pub fn file_stem(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.') { c } else { '_' })
        .collect()
}
