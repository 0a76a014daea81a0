use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::artifacts::{sha256_hex, Artifacts, OutputFile};
use crate::config::{resolve_value, ExperimentConfig};
use crate::error::{CliError, Result};
use crate::registry::Registry;

pub const MANIFEST_NAME: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ErrorRecord {
    /// stable tag from [`CliError::tag`]
    pub kind: String,
    pub message: String,
}

impl From<&CliError> for ErrorRecord {
    fn from(e: &CliError) -> Self {
        ErrorRecord {
            kind: e.tag().to_string(),
            message: e.to_string(),
        }
    }
}

/// Record of one run, written once as `manifest.json` in the run directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub kind: String,
    /// resolved configuration, defaults included
    pub config: ExperimentConfig,
    pub code_version: String,
    pub started_unix: u64,
    pub wall_time_s: f64,
    pub status: RunStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorRecord>,
    pub outputs: Vec<OutputFile>,
}

impl RunManifest {
    pub fn read(run_dir: &Path) -> Result<Self> {
        let path = run_dir.join(MANIFEST_NAME);
        let text = fs::read_to_string(&path)
            .map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Parse {
            path: path.display().to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn is_ok(&self) -> bool {
        self.status == RunStatus::Ok
    }
}

/// Runs `cfg` into `run_dir` and writes the manifest there. Runner errors
/// are recorded in the manifest rather than returned; only failures to
/// create the directory or write the manifest surface as `Err`.
pub fn run(cfg: &ExperimentConfig, registry: &Registry, run_dir: &Path) -> Result<RunManifest> {
    let started_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    let clock = Instant::now();
    let mut out = Artifacts::new(run_dir)?;
    let outcome = registry
        .get(cfg.kind())
        .and_then(|runner| runner.run(&cfg.params, &cfg.experiment.settings, &mut out));
    let manifest = RunManifest {
        kind: cfg.kind().to_string(),
        config: cfg.clone(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        started_unix,
        wall_time_s: clock.elapsed().as_secs_f64(),
        status: if outcome.is_ok() {
            RunStatus::Ok
        } else {
            RunStatus::Error
        },
        error: outcome.as_ref().err().map(ErrorRecord::from),
        outputs: out.into_files(),
    };
    let path = run_dir.join(MANIFEST_NAME);
    let text = serde_json::to_string_pretty(&manifest)?;
    fs::write(&path, text + "\n")
        .map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
    Ok(manifest)
}

/// Outcome of re-running a recorded configuration.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct VerifyReport {
    pub matched: Vec<String>,
    /// recorded files whose re-run hash differs
    pub mismatched: Vec<String>,
    /// recorded files the re-run did not produce
    pub missing: Vec<String>,
    /// files produced by the re-run but absent from the manifest
    pub unexpected: Vec<String>,
    /// recorded files whose on-disk copy no longer matches the manifest
    pub tampered: Vec<String>,
    /// set when the re-run ended differently from the recorded run
    pub status_changed: Option<String>,
}

impl VerifyReport {
    pub fn is_clean(&self) -> bool {
        self.mismatched.is_empty()
            && self.missing.is_empty()
            && self.unexpected.is_empty()
            && self.tampered.is_empty()
            && self.status_changed.is_none()
    }
}

/// Re-runs the configuration recorded in `run_dir` into a scratch
/// directory and compares every output hash with the manifest. Also checks
/// the files still present in `run_dir` against their recorded hashes.
pub fn verify(run_dir: &Path, registry: &Registry) -> Result<VerifyReport> {
    let recorded = RunManifest::read(run_dir)?;
    let mut report = VerifyReport::default();
    for f in &recorded.outputs {
        let on_disk = run_dir.join(&f.path);
        match fs::read(&on_disk) {
            Ok(data) if sha256_hex(&data) == f.sha256 => {}
            _ => report.tampered.push(f.path.clone()),
        }
    }

    let cfg = resolve_value(serde_json::to_value(&recorded.config)?, registry)?;
    let scratch = tempfile::tempdir().map_err(|e| CliError::io("creating scratch directory", e))?;
    let scratch_dir: PathBuf = scratch.path().join("rerun");
    let rerun = run(&cfg, registry, &scratch_dir)?;
    if rerun.status != recorded.status || rerun.error != recorded.error {
        let show =
            |e: &Option<ErrorRecord>| e.as_ref().map_or("ok".to_string(), |r| r.message.clone());
        report.status_changed = Some(format!(
            "recorded {}, re-run {}",
            show(&recorded.error),
            show(&rerun.error)
        ));
    }

    for f in &recorded.outputs {
        match rerun.outputs.iter().find(|g| g.path == f.path) {
            Some(g) if g.sha256 == f.sha256 => report.matched.push(f.path.clone()),
            Some(_) => report.mismatched.push(f.path.clone()),
            None => report.missing.push(f.path.clone()),
        }
    }
    for g in &rerun.outputs {
        if !recorded.outputs.iter().any(|f| f.path == g.path) {
            report.unexpected.push(g.path.clone());
        }
    }
    Ok(report)
}
