//! Run directories, artifacts and the manifest.

use std::fs;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{ExperimentSpec, Kind};
use crate::criteria::Check;
use crate::error::Result;

pub const MANIFEST: &str = "manifest.json";
pub const SUMMARY: &str = "summary.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// One data file produced by an experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    pub fn new(name: impl Into<String>, bytes: impl Into<Vec<u8>>) -> Self {
        Self { name: name.into(), bytes: bytes.into() }
    }

    pub fn json<T: Serialize>(name: impl Into<String>, value: &T) -> Result<Self> {
        let mut bytes = serde_json::to_vec_pretty(value)?;
        bytes.push(b'\n');
        Ok(Self::new(name, bytes))
    }
}

/// What an experiment hands back to the orchestrator.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub summary: serde_json::Value,
    pub checks: Vec<Check>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        crate::criteria::all_passed(&self.checks)
    }
}

/// `summary.json`: experiment-level results and the evaluated checks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub kind: Kind,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub results: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputEntry {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModuleVersions {
    pub kinetics_core: String,
    pub kinetics_harness: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub kind: Kind,
    pub config_hash: String,
    pub tool_version: String,
    pub seed: u64,
    pub workers: Option<usize>,
    pub started: DateTime<Utc>,
    pub finished: DateTime<Utc>,
    pub module_versions: ModuleVersions,
    /// The resolved configuration with every default materialized.
    pub spec: ExperimentSpec,
    pub outputs: Vec<OutputEntry>,
}

impl RunManifest {
    pub fn read(dir: &Path) -> Result<Self> {
        let text = fs::read_to_string(dir.join(MANIFEST))?;
        Ok(serde_json::from_str(&text)?)
    }
}

pub fn config_hash(spec: &ExperimentSpec) -> String {
    sha256_hex(spec.canonical_json().as_bytes())
}

/// Creates `<root>/<kind>-<timestamp>-<hash8>`, adding a counter on collision.
fn make_run_dir(root: &Path, kind: Kind, started: DateTime<Utc>, hash: &str) -> Result<PathBuf> {
    fs::create_dir_all(root)?;
    let base = format!("{}-{}-{}", kind.label(), started.format("%Y%m%dT%H%M%S%3fZ"), &hash[..8]);
    let mut dir = root.join(&base);
    let mut k = 1;
    loop {
        match fs::create_dir(&dir) {
            Ok(()) => return Ok(dir),
            Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => {
                dir = root.join(format!("{base}-{k}"));
                k += 1;
            }
            Err(e) => return Err(e.into()),
        }
    }
}

/// Writes every artifact, then `summary.json`, then the manifest last so a
/// directory without a manifest is recognizably incomplete.
pub fn write_run(root: &Path, spec: &ExperimentSpec, outcome: &Outcome, started: DateTime<Utc>) -> Result<(PathBuf, RunManifest)> {
    let hash = config_hash(spec);
    let dir = make_run_dir(root, spec.kind, started, &hash)?;
    let summary = Summary { kind: spec.kind, passed: outcome.passed(), checks: outcome.checks.clone(), results: outcome.summary.clone() };
    let summary = Artifact::json(SUMMARY, &summary)?;
    let mut outputs = Vec::new();
    for a in outcome.artifacts.iter().chain(std::iter::once(&summary)) {
        let path = dir.join(&a.name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, &a.bytes)?;
        outputs.push(OutputEntry { file: a.name.clone(), sha256: sha256_hex(&a.bytes), bytes: a.bytes.len() as u64 });
    }
    let manifest = RunManifest {
        kind: spec.kind,
        config_hash: hash,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        seed: spec.seed,
        workers: spec.workers,
        started,
        finished: Utc::now(),
        module_versions: ModuleVersions {
            kinetics_core: kinetics_core::VERSION.to_string(),
            kinetics_harness: env!("CARGO_PKG_VERSION").to_string(),
        },
        spec: spec.clone(),
        outputs,
    };
    fs::write(dir.join(MANIFEST), serde_json::to_vec_pretty(&manifest)?)?;
    Ok((dir, manifest))
}

/// RFC-4180 CSV with a mandatory header.
pub fn csv_bytes<S: AsRef<str>>(header: &[&str], rows: impl IntoIterator<Item = Vec<S>>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::CRLF).from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|c| c.as_ref()))?;
    }
    w.into_inner().map_err(|e| std::io::Error::other(e.to_string()).into())
}

/// Shortest round-trip decimal form.
pub fn num(x: f64) -> String {
    format!("{x:e}")
}
