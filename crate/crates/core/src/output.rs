//! Artifact writing: fixed float formatting, CSV files and a JSON manifest
//! carrying content digests.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

/// Twelve significant digits in scientific notation. Rust float formatting
/// does not consult the locale.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct ManifestEntry {
    pub path: String,
    pub sha256: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub subcommand: String,
    pub code_version: String,
    pub config_sha256: String,
    pub wall_time_s: f64,
    pub files: Vec<ManifestEntry>,
}

/// Collects artifacts for one run. Files are written immediately; the
/// manifest is written last by [`ArtifactWriter::finish`].
#[derive(Debug)]
pub struct ArtifactWriter {
    dir: PathBuf,
    entries: Vec<ManifestEntry>,
}

pub const MANIFEST_NAME: &str = "manifest.json";

impl ArtifactWriter {
    pub fn create(dir: &Path) -> io::Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            entries: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, name: &str, contents: &str) -> io::Result<()> {
        fs::write(self.dir.join(name), contents)?;
        self.entries.retain(|e| e.path != name);
        self.entries.push(ManifestEntry {
            path: name.to_string(),
            sha256: sha256_hex(contents.as_bytes()),
            bytes: contents.len(),
        });
        Ok(())
    }

    pub fn finish(
        self,
        subcommand: &str,
        config_text: &str,
        wall_time_s: f64,
    ) -> io::Result<Manifest> {
        let manifest = Manifest {
            subcommand: subcommand.to_string(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            config_sha256: sha256_hex(config_text.as_bytes()),
            wall_time_s,
            files: self.entries,
        };
        let json = serde_json::to_string_pretty(&manifest).map_err(io::Error::other)?;
        fs::write(self.dir.join(MANIFEST_NAME), json + "\n")?;
        Ok(manifest)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_f64(1.0), "1.00000000000e0");
        assert_eq!(fmt_f64(-0.000123456789012345), "-1.23456789012e-4");
    }

    #[test]
    fn known_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
