//! Output files and the provenance manifest.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use boltzsmooth::{ExperimentConfig, IsoSpectralField, Trajectory};
use serde_json::{json, Map, Value};
use sha2::{Digest, Sha256};

use crate::Failure;

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// `x,phi` rows at 17 significant digits.
pub fn snapshot_csv(phi: &IsoSpectralField) -> String {
    let mut s = String::with_capacity(48 * phi.values.len());
    s.push_str("x,phi\n");
    for (x, v) in phi.grid.points().iter().zip(&phi.values) {
        s.push_str(&format!("{x:.16e},{v:.16e}\n"));
    }
    s
}

pub fn moments_csv(traj: &Trajectory) -> String {
    let mut s = String::from("t,m0,m1,m2,m3,m4\n");
    for row in &traj.moment_series {
        s.push_str(&format!("{}", row.t));
        for m in &row.m {
            s.push_str(&format!(",{m:.16e}"));
        }
        s.push('\n');
    }
    s
}

pub struct Manifest {
    body: Map<String, Value>,
    files: BTreeMap<String, String>,
    config_hash: String,
}

impl Manifest {
    pub fn new(command: &str, cfg: &ExperimentConfig) -> Result<Self, Failure> {
        let config = serde_json::to_value(cfg).map_err(|e| Failure::Runtime(e.to_string()))?;
        let config_hash = sha256_hex(config.to_string().as_bytes());
        let mut body = Map::new();
        body.insert("command".into(), json!(command));
        body.insert("version".into(), json!(env!("CARGO_PKG_VERSION")));
        body.insert("config".into(), config);
        body.insert("config_hash".into(), json!(config_hash));
        Ok(Self { body, files: BTreeMap::new(), config_hash })
    }

    pub fn config_hash(&self) -> &str {
        &self.config_hash
    }

    pub fn insert(&mut self, key: &str, value: Value) {
        self.body.insert(key.into(), value);
    }

    pub fn write_file(&mut self, dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
        std::fs::write(dir.join(name), contents)?;
        self.files.insert(name.into(), sha256_hex(contents.as_bytes()));
        Ok(())
    }

    pub fn set_status(&mut self, outcome: &Result<(), Failure>) {
        let (status, message) = match outcome {
            Ok(()) => ("ok", None),
            Err(f @ Failure::Violation(_)) => ("violation", Some(f.message())),
            Err(f @ Failure::BlowUp(_)) => ("blow_up", Some(f.message())),
            Err(f) => ("error", Some(f.message())),
        };
        self.insert("status", json!(status));
        if let Some(m) = message {
            self.insert("error", json!(m));
        }
    }

    /// Writes `manifest.json`. `content_hash` covers every field except
    /// `created_unix`, so identical runs differ only in the timestamp.
    pub fn write(mut self, dir: &Path) -> Result<(), Failure> {
        let files = serde_json::to_value(&self.files).unwrap();
        self.body.insert("files".into(), files);
        let content_hash = sha256_hex(Value::Object(self.body.clone()).to_string().as_bytes());
        self.body.insert("content_hash".into(), json!(content_hash));
        let created = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        self.body.insert("created_unix".into(), json!(created));
        let text = serde_json::to_string_pretty(&Value::Object(self.body)).unwrap() + "\n";
        std::fs::write(dir.join("manifest.json"), text)?;
        Ok(())
    }
}
