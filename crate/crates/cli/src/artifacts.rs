//! Artifact files, atomic writes and per-step lineage manifests.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use hafcp::fingerprint::sha256_hex;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, ExitKind, Result};

pub const CONFIG: &str = "config.json";
pub const MODEL: &str = "model.json";
pub const IMPORTANCE: &str = "importance.csv";
pub const METRICS: &str = "metrics.json";
pub const SPECS: &str = "specs.json";
pub const FRAME: &str = "frame.json";
pub const PATTERNS: &str = "patterns.jsonl";
pub const PATTERNS_TABLE: &str = "patterns.txt";
pub const REPORT_JSON: &str = "report.json";
pub const REPORT_MD: &str = "report.md";

pub fn manifest_name(step: &str) -> String {
    format!("{step}.manifest.json")
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    let fail = |e: std::io::Error| CliError::internal(format!("writing {}: {e}", dir.join(name).display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.as_file().sync_all().map_err(fail)?;
    tmp.persist(dir.join(name)).map_err(|e| fail(e.error))?;
    Ok(())
}

pub fn read_artifact(dir: &Path, name: &str) -> Result<Vec<u8>> {
    let path = dir.join(name);
    std::fs::read(&path).map_err(|e| {
        if e.kind() == std::io::ErrorKind::NotFound {
            CliError::new(ExitKind::MissingArtifact, "MissingArtifact", format!("{} not found", path.display()))
        } else {
            CliError::internal(format!("reading {}: {e}", path.display()))
        }
    })
}

pub fn read_text(dir: &Path, name: &str) -> Result<String> {
    String::from_utf8(read_artifact(dir, name)?)
        .map_err(|_| CliError::input("MalformedArtifact", format!("{name} is not UTF-8")))
}

pub fn read_json<T: serde::de::DeserializeOwned>(dir: &Path, name: &str) -> Result<T> {
    serde_json::from_slice(&read_artifact(dir, name)?)
        .map_err(|e| CliError::input("MalformedArtifact", format!("{name}: {e}")))
}

pub fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("artifact serializes") + "\n"
}

/// Lineage record written by every step. Inputs and outputs map artifact
/// names to the sha256 of their bytes; `splits` holds dataset fingerprints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub step: String,
    pub config_fingerprint: String,
    pub splits: BTreeMap<String, String>,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
}

/// Collects a step's outputs and writes them together with its manifest.
pub struct StepWriter {
    dir: PathBuf,
    manifest: Manifest,
}

impl StepWriter {
    pub fn new(dir: &Path, step: &str, config_fingerprint: &str) -> Self {
        Self {
            dir: dir.to_path_buf(),
            manifest: Manifest {
                step: step.into(),
                config_fingerprint: config_fingerprint.into(),
                splits: BTreeMap::new(),
                inputs: BTreeMap::new(),
                outputs: BTreeMap::new(),
            },
        }
    }

    pub fn split(&mut self, name: &str, fingerprint: &str) -> &mut Self {
        self.manifest.splits.insert(name.into(), fingerprint.into());
        self
    }

    pub fn input(&mut self, name: &str, bytes: &[u8]) -> &mut Self {
        self.manifest.inputs.insert(name.into(), sha256_hex(bytes));
        self
    }

    pub fn output(&mut self, name: &str, bytes: &[u8]) -> Result<&mut Self> {
        write_atomic(&self.dir, name, bytes)?;
        self.manifest.outputs.insert(name.into(), sha256_hex(bytes));
        Ok(self)
    }

    pub fn finish(self) -> Result<Manifest> {
        write_atomic(&self.dir, &manifest_name(&self.manifest.step), to_json(&self.manifest).as_bytes())?;
        Ok(self.manifest)
    }
}

/// Loads a step's manifest and checks that it belongs to this config and
/// that its outputs on disk are the ones it recorded.
pub fn verify_step(dir: &Path, step: &str, config_fingerprint: &str) -> Result<Manifest> {
    let m: Manifest = read_json(dir, &manifest_name(step))?;
    if m.config_fingerprint != config_fingerprint {
        return Err(CliError::lineage(format!(
            "{step} artifacts were produced under config {}, current config is {config_fingerprint}",
            m.config_fingerprint
        )));
    }
    for (name, sha) in &m.outputs {
        if &sha256_hex(&read_artifact(dir, name)?) != sha {
            return Err(CliError::lineage(format!("{name} changed since the {step} step wrote it")));
        }
    }
    Ok(m)
}

/// Checks that `consumer` read exactly what `producer` wrote for `name`.
pub fn check_link(producer: &Manifest, consumer: &Manifest, name: &str) -> Result<()> {
    match (producer.outputs.get(name), consumer.inputs.get(name)) {
        (Some(a), Some(b)) if a == b => Ok(()),
        _ => Err(CliError::lineage(format!(
            "{} consumed a different {name} than {} produced",
            consumer.step, producer.step
        ))),
    }
}
