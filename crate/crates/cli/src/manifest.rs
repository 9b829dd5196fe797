//! Run manifests and the files that carry their digest.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command_line: Vec<String>,
    pub config_digest: String,
    pub seeds: BTreeMap<String, u64>,
    /// Digest of the input space file, or of the written one for `generate`.
    pub space_digest: Option<String>,
    pub version: String,
    pub duration_seconds: f64,
}

/// Everything but the duration, in a fixed field order.
#[derive(Serialize)]
struct Stable<'a> {
    command_line: &'a [String],
    config_digest: &'a str,
    seeds: &'a BTreeMap<String, u64>,
    space_digest: &'a Option<String>,
    version: &'a str,
}

impl RunManifest {
    pub fn new(command_line: Vec<String>, config: &impl Serialize) -> Self {
        let config = serde_json::to_vec(config).expect("configs serialize");
        RunManifest {
            command_line,
            config_digest: sha256_hex(&config),
            seeds: BTreeMap::new(),
            space_digest: None,
            version: env!("CARGO_PKG_VERSION").to_string(),
            duration_seconds: 0.0,
        }
    }

    /// SHA-256 over the manifest without its duration.
    pub fn digest(&self) -> String {
        let stable = Stable {
            command_line: &self.command_line,
            config_digest: &self.config_digest,
            seeds: &self.seeds,
            space_digest: &self.space_digest,
            version: &self.version,
        };
        sha256_hex(&serde_json::to_vec(&stable).expect("manifest serializes"))
    }
}

/// `dir/name.json` becomes `dir/name.<ext>`.
pub fn sibling(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}
