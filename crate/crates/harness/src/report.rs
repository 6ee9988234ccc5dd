//! Human-readable summary of a finished run directory plus gnuplot data.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::config::Kind;
use crate::error::{HarnessError, Result};
use crate::output::{sha256_hex, RunManifest, Summary, MANIFEST, SUMMARY};

pub const PLOT_DIR: &str = "plots";

/// Data files every complete run of a kind contains besides the summary.
pub fn expected_artifacts(kind: Kind) -> &'static [&'static str] {
    match kind {
        Kind::KernelReport => &["profile.csv", "theta_table.csv", "kernels.json"],
        Kind::PovznerSweep => &["povzner.json", "points.csv", "random_tuples.csv"],
        Kind::Simulate => &["moments.csv"],
        Kind::MomentCreation => &["ladder.json"],
        Kind::FourierResidual => &["lemma_decay.csv", "fourier.json", "equicontinuity.json"],
    }
}

fn kind_from_dir_name(dir: &Path) -> Option<Kind> {
    let name = dir.file_name()?.to_str()?;
    [Kind::MomentCreation, Kind::KernelReport, Kind::PovznerSweep, Kind::Simulate, Kind::FourierResidual]
        .into_iter()
        .find(|k| name.starts_with(&format!("{}-", k.label())))
}

fn missing_error(dir: &Path, missing: Vec<String>) -> HarnessError {
    HarnessError::MissingArtifacts { dir: dir.display().to_string(), missing }
}

/// Lists what is absent, or has the wrong digest, in a run directory.
pub fn audit(dir: &Path) -> Result<RunManifest> {
    if !dir.join(MANIFEST).is_file() {
        let mut missing = vec![MANIFEST.to_string()];
        if let Some(kind) = kind_from_dir_name(dir) {
            missing.extend(expected_artifacts(kind).iter().chain(&[SUMMARY]).filter(|f| !dir.join(f).is_file()).map(|f| f.to_string()));
        }
        return Err(missing_error(dir, missing));
    }
    let manifest = RunManifest::read(dir)?;
    let mut missing = Vec::new();
    for o in &manifest.outputs {
        match fs::read(dir.join(&o.file)) {
            Ok(bytes) if sha256_hex(&bytes) == o.sha256 => {}
            Ok(_) => missing.push(format!("{} (digest mismatch)", o.file)),
            Err(_) => missing.push(o.file.clone()),
        }
    }
    for f in expected_artifacts(manifest.kind).iter().chain(&[SUMMARY]) {
        if !manifest.outputs.iter().any(|o| o.file == *f) {
            missing.push(format!("{f} (not in manifest)"));
        }
    }
    if missing.is_empty() {
        Ok(manifest)
    } else {
        Err(missing_error(dir, missing))
    }
}

/// Whitespace-separated copy of a CSV with the header as a comment line.
pub fn csv_to_dat(csv: &[u8]) -> Result<String> {
    let mut r = csv::Reader::from_reader(csv);
    let mut out = String::from("#");
    for h in r.headers()? {
        out.push(' ');
        out.push_str(h);
    }
    out.push('\n');
    for rec in r.records() {
        let rec = rec?;
        out.push_str(&rec.iter().collect::<Vec<_>>().join(" "));
        out.push('\n');
    }
    Ok(out)
}

pub struct ReportOutcome {
    pub text: String,
    pub passed: bool,
}

pub fn report(dir: &Path) -> Result<ReportOutcome> {
    let manifest = audit(dir)?;
    let summary: Summary = serde_json::from_slice(&fs::read(dir.join(SUMMARY))?)?;
    let mut text = String::new();
    let _ = writeln!(text, "run: {}", dir.display());
    let _ = writeln!(text, "kind: {}  seed: {}  config hash: {}", manifest.kind.label(), manifest.seed, manifest.config_hash);
    let _ = writeln!(text, "started {}  finished {}", manifest.started.to_rfc3339(), manifest.finished.to_rfc3339());
    for c in &summary.checks {
        let _ = writeln!(text, "{}", c.line());
    }
    match manifest.kind {
        Kind::PovznerSweep => {
            if let Some(w) = summary.results.get("worst_route_delta") {
                let _ = writeln!(text, "worst sweep route delta: {}", w);
            }
            if let Some(w) = summary.results.get("worst_random_tuple") {
                let _ = writeln!(text, "worst random-tuple route delta: {}", w);
            }
        }
        Kind::Simulate => {
            for key in ["max_energy_increase", "max_momentum_drift", "max_energy_change"] {
                if let Some(v) = summary.results.get(key) {
                    let _ = writeln!(text, "{key}: {v}");
                }
            }
        }
        _ => {}
    }
    let plots = dir.join(PLOT_DIR);
    for o in manifest.outputs.iter().filter(|o| o.file.ends_with(".csv")) {
        fs::create_dir_all(&plots)?;
        let dat = csv_to_dat(&fs::read(dir.join(&o.file))?)?;
        let name = o.file.trim_end_matches(".csv").replace('/', "_") + ".dat";
        fs::write(plots.join(&name), dat)?;
        let _ = writeln!(text, "plot data: {}/{}", PLOT_DIR, name);
    }
    let _ = writeln!(text, "overall: {}", if summary.passed { "PASS" } else { "FAIL" });
    Ok(ReportOutcome { text, passed: summary.passed })
}
