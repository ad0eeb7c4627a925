//! Run manifests: what was run, with which seeds and parameters.
//!
//! The hash covers everything that determines the outputs (subcommand,
//! config hash, seeds, parameters, tool version) but not the output file
//! list, so it can be stamped into the outputs while they are written.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub params: serde_json::Value,
    pub version: String,
    pub outputs: Vec<String>,
}

/// Lowercase hex SHA-256 of a byte string.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

impl RunManifest {
    pub fn new(subcommand: &str, config_hash: &str, seeds: Vec<u64>, params: serde_json::Value) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            config_hash: config_hash.to_string(),
            seeds,
            params,
            version: env!("CARGO_PKG_VERSION").to_string(),
            outputs: Vec::new(),
        }
    }

    pub fn hash(&self) -> String {
        // serde_json keeps map keys sorted, so this is canonical.
        let key = serde_json::json!({
            "subcommand": self.subcommand,
            "config_hash": self.config_hash,
            "seeds": self.seeds,
            "params": self.params,
            "version": self.version,
        });
        sha256_hex(key.to_string().as_bytes())
    }

    pub fn to_json(&self) -> String {
        let mut v = serde_json::to_value(self).expect("manifest serializes");
        v["hash"] = serde_json::Value::String(self.hash());
        serde_json::to_string_pretty(&v).expect("manifest serializes")
    }
}
