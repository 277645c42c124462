use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{ExperimentConfig, PointOutcome, ResultRecord, Summary};
use crate::bath::BathSpec;
use crate::error::{Error, Result};

pub const SUMMARY_FILE: &str = "summary.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Serialize)]
pub struct ManifestEntry {
    pub label: String,
    pub file: Option<String>,
    pub summary: Option<Summary>,
    pub error: Option<String>,
}

/// Everything needed to regenerate a run: `stq run|sweep --config manifest.json`.
#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub manifest_version: u32,
    pub tool: String,
    pub version: String,
    /// Fully resolved config including all defaults.
    pub config: ExperimentConfig,
    /// Bath parameters actually simulated, after calibration.
    pub effective_bath: BathSpec,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    fn new(config: &ExperimentConfig, entries: Vec<ManifestEntry>) -> Self {
        Manifest {
            manifest_version: 1,
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            config: config.clone(),
            effective_bath: config.effective_bath(),
            entries,
        }
    }
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::NumericalFailure(format!("csv serialization failed: {other:?}")),
    }
}

fn write_rows(path: &Path, record: &ResultRecord) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    for row in &record.rows {
        w.serialize(row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn run_dir(root: &Path, config: &ExperimentConfig) -> Result<PathBuf> {
    let dir = root.join(&config.name);
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<()> {
    let text = serde_json::to_string_pretty(manifest)
        .map_err(|e| Error::NumericalFailure(format!("manifest serialization failed: {e}")))?;
    fs::write(dir.join(MANIFEST_FILE), text + "\n")?;
    Ok(())
}

/// Writes `<root>/<name>/run.csv` and the manifest. Returns the run directory.
pub fn write_trajectory(root: &Path, record: &ResultRecord) -> Result<PathBuf> {
    let dir = run_dir(root, &record.config)?;
    let file = format!("{}.csv", record.label());
    write_rows(&dir.join(&file), record)?;
    let entry = ManifestEntry { label: record.label(), file: Some(file), summary: Some(record.summary), error: None };
    write_manifest(&dir, &Manifest::new(&record.config, vec![entry]))?;
    Ok(dir)
}

/// Writes one CSV per successful point, `summary.csv` with one line per
/// point, and the manifest. Returns the run directory.
pub fn write_sweep(root: &Path, config: &ExperimentConfig, outcomes: &[PointOutcome]) -> Result<PathBuf> {
    let dir = run_dir(root, config)?;
    let axes: Vec<&str> = config.sweep.iter().chain(&config.grid).map(|s| s.axis.name()).collect();
    let mut summary = csv::Writer::from_path(dir.join(SUMMARY_FILE)).map_err(csv_err)?;
    let mut header: Vec<&str> = axes.clone();
    header.extend(["status", "max_ddse", "argmax_t_ns", "max_concurrence", "null_from_ns", "min_eig", "error"]);
    summary.write_record(&header).map_err(csv_err)?;

    let mut entries = Vec::with_capacity(outcomes.len());
    for outcome in outcomes {
        let label = outcome.label();
        let mut line: Vec<String> = outcome.point.iter().map(|(_, v)| v.to_string()).collect();
        match &outcome.result {
            Ok(record) => {
                let file = format!("{label}.csv");
                write_rows(&dir.join(&file), record)?;
                let s = record.summary;
                line.extend([
                    "ok".to_string(),
                    s.max_ddse.to_string(),
                    s.argmax_t.to_string(),
                    s.max_concurrence.to_string(),
                    fmt_opt(s.null_from),
                    s.min_eigenvalue.to_string(),
                    String::new(),
                ]);
                entries.push(ManifestEntry { label, file: Some(file), summary: Some(s), error: None });
            }
            Err(e) => {
                line.extend([
                    "failed".to_string(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    String::new(),
                    e.clone(),
                ]);
                entries.push(ManifestEntry { label, file: None, summary: None, error: Some(e.clone()) });
            }
        }
        summary.write_record(&line).map_err(csv_err)?;
    }
    summary.flush()?;
    write_manifest(&dir, &Manifest::new(config, entries))?;
    Ok(dir)
}
