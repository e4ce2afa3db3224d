//! Configuration files, presets, run manifests and trajectory storage.

pub mod config;
pub mod presets;
pub mod report;
pub mod trajectory;

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use config::Config;

pub const CODE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Number formatted with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex(&Sha256::digest(bytes))
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_file(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Record of one CLI stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub stage: String,
    pub code_version: String,
    pub config: Config,
    pub seed: Option<u64>,
    pub tolerances: serde_json::Value,
    pub truncation: serde_json::Value,
    /// (stage, seconds)
    pub timing: Vec<(String, f64)>,
    pub outputs: Vec<OutputFile>,
}

impl RunManifest {
    pub fn new(stage: &str, config: &Config) -> Self {
        Self {
            stage: stage.to_string(),
            code_version: CODE_VERSION.to_string(),
            config: config.clone(),
            seed: config.simulation.as_ref().map(|s| s.seed),
            tolerances: serde_json::Value::Null,
            truncation: serde_json::Value::Null,
            timing: Vec::new(),
            outputs: Vec::new(),
        }
    }

    /// Writes `contents` to `dir/name` and records its checksum.
    pub fn write_output(&mut self, dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf> {
        let path = dir.join(name);
        fs::write(&path, contents)?;
        self.record(name, contents.len() as u64, sha256_hex(contents));
        Ok(path)
    }

    pub fn record(&mut self, name: &str, bytes: u64, sha256: String) {
        self.outputs.push(OutputFile { path: name.to_string(), bytes, sha256 });
    }

    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(self)?)?;
        Ok(path)
    }

    /// Checks that every listed output exists next to the manifest with the
    /// recorded checksum.
    pub fn verify(&self, dir: &Path) -> Result<()> {
        for out in &self.outputs {
            let got = sha256_file(&dir.join(&out.path))?;
            if got != out.sha256 {
                return Err(Error::Config(format!("checksum mismatch for {}: {} != {}", out.path, got, out.sha256)));
            }
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
    }
}

/// Tab-separated table with a header line.
pub fn tsv(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut out = header.join("\t");
    out.push('\n');
    for row in rows {
        out.push_str(&row.join("\t"));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -9.758245509444066, 1e-300, 6.02214076e23] {
            let s = fmt17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17, "{s}");
        }
    }

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex(b"abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }

    #[test]
    fn manifest_detects_tampering() {
        let dir = tempfile::tempdir().unwrap();
        let mut m = RunManifest::new("spectrum", &presets::preset("case1").unwrap()[0].1);
        m.write_output(dir.path(), "a.tsv", b"x\t1\n").unwrap();
        m.verify(dir.path()).unwrap();
        fs::write(dir.path().join("a.tsv"), b"x\t2\n").unwrap();
        assert!(m.verify(dir.path()).is_err());
    }
}
