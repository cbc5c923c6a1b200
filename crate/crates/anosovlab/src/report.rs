use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;
use crate::LabError;

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub experiment: String,
    pub summary: serde_json::Value,
    /// File name to contents, including `summary.json` and `manifest.json`.
    pub files: BTreeMap<String, Vec<u8>>,
}

#[derive(Serialize)]
struct ManifestEntry<'a> {
    file: &'a str,
    bytes: usize,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    experiment: &'a str,
    seed: u64,
    config_sha256: String,
    files: Vec<ManifestEntry<'a>>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Collects report files for one run.
pub struct ReportBuilder {
    files: BTreeMap<String, Vec<u8>>,
}

impl ReportBuilder {
    pub fn new() -> Self {
        ReportBuilder { files: BTreeMap::new() }
    }

    pub fn csv<T: Serialize>(&mut self, name: &str, rows: &[T]) -> Result<(), LabError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in rows {
            w.serialize(r).map_err(|e| LabError::ExperimentFailed(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| LabError::ExperimentFailed(e.to_string()))?;
        self.files.insert(name.to_string(), bytes);
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), LabError> {
        let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| LabError::ExperimentFailed(e.to_string()))?;
        bytes.push(b'\n');
        self.files.insert(name.to_string(), bytes);
        Ok(())
    }

    pub fn finish<T: Serialize>(mut self, cfg: &ExperimentConfig, summary: &T) -> Result<Report, LabError> {
        let summary = serde_json::to_value(summary).map_err(|e| LabError::ExperimentFailed(e.to_string()))?;
        self.json("summary.json", &summary)?;
        let experiment = cfg.experiment.name();
        let manifest = Manifest {
            experiment,
            seed: cfg.seed,
            config_sha256: sha256_hex(cfg.to_json().as_bytes()),
            files: self
                .files
                .iter()
                .map(|(k, v)| ManifestEntry { file: k, bytes: v.len(), sha256: sha256_hex(v) })
                .collect(),
        };
        let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
        bytes.push(b'\n');
        self.files.insert("manifest.json".to_string(), bytes);
        Ok(Report { experiment: experiment.to_string(), summary, files: self.files })
    }
}

impl Default for ReportBuilder {
    fn default() -> Self {
        Self::new()
    }
}

impl Report {
    pub fn write_to(&self, dir: &Path) -> io::Result<()> {
        std::fs::create_dir_all(dir)?;
        for (name, bytes) in &self.files {
            std::fs::write(dir.join(name), bytes)?;
        }
        Ok(())
    }

    pub fn file(&self, name: &str) -> Option<&[u8]> {
        self.files.get(name).map(Vec::as_slice)
    }

    pub fn summary_f64(&self, key: &str) -> Option<f64> {
        self.summary.get(key).and_then(serde_json::Value::as_f64)
    }
}
