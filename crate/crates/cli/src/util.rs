//! Run manifests, hashing, and atomic output files.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use mompca_core::Error;

/// Record of one CLI run: resolved parameters, input hashes, tool version.
/// Identical manifests imply identical outputs.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub subcommand: &'static str,
    pub seed: u64,
    /// Every resolved parameter, including defaults that were filled in.
    pub parameters: BTreeMap<String, serde_json::Value>,
    /// sha256 of each input file.
    pub input_hashes: BTreeMap<String, String>,
    pub outputs: Vec<String>,
}

impl RunManifest {
    pub fn new(subcommand: &'static str, seed: u64) -> Self {
        Self {
            tool: "mompca",
            version: env!("CARGO_PKG_VERSION"),
            subcommand,
            seed,
            parameters: BTreeMap::new(),
            input_hashes: BTreeMap::new(),
            outputs: Vec::new(),
        }
    }

    pub fn param(&mut self, key: &str, value: impl Serialize) -> &mut Self {
        self.parameters.insert(
            key.to_string(),
            serde_json::to_value(value).expect("parameters serialize"),
        );
        self
    }

    pub fn input(&mut self, path: &Path) -> Result<&mut Self, Error> {
        self.input_hashes
            .insert(path.display().to_string(), sha256_file(path)?);
        Ok(self)
    }

    pub fn output(&mut self, path: &Path) -> &mut Self {
        self.outputs.push(path.display().to_string());
        self
    }

    pub fn write(&self, path: &Path) -> Result<(), Error> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        write_atomic(path, text.as_bytes())
    }
}

pub fn sha256_file(path: &Path) -> Result<String, Error> {
    let mut file = fs::File::open(path)?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = file.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    let digest = hasher.finalize();
    let mut hex = String::with_capacity(64);
    for byte in digest {
        use std::fmt::Write;
        write!(hex, "{byte:02x}").expect("writing to a string");
    }
    Ok(hex)
}

/// Writes via a temp file in the same directory, then renames into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Error> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;
    let tmp: PathBuf = dir.join(format!(
        ".tmp-{}",
        path.file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "out".into())
    ));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// `<path><suffix>` keeping the directory.
pub fn suffixed_path(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "run".into());
    name.push_str(suffix);
    path.with_file_name(name)
}

/// Default manifest path: `<output>.manifest.json`.
pub fn manifest_path(primary_output: &Path) -> PathBuf {
    suffixed_path(primary_output, ".manifest.json")
}

/// The block-count heuristic used when L is omitted.
pub fn default_block_count(n: usize) -> usize {
    let heuristic = 3usize.max(3 * (n as f64).sqrt().ceil() as usize);
    let cap = (n / 10).max(1);
    heuristic.min(cap).clamp(1, n)
}
