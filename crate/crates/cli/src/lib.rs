//! Configuration, experiment orchestration and artifact emission for the
//! auxin travelling-wave toolkit.
//!
//! A run is described by an [`ExperimentConfig`] (JSON). Its `experiment.kind`
//! selects a runner from the [`Registry`]; the runner writes CSV and SVG
//! artifacts into the run directory and [`run`] records them, with SHA-256
//! hashes, in `manifest.json`.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod artifacts;
pub mod config;
pub mod error;
pub mod experiments;
pub mod manifest;
pub mod presets;
pub mod registry;
pub mod svg;

pub use artifacts::{Artifacts, OutputFile};
pub use config::{
    apply_override, load_config, load_config_with, parse_config, ExperimentConfig, ExperimentSpec,
    OUT_ROOT_ENV,
};
pub use error::{CliError, Result};
pub use manifest::{run, verify, ErrorRecord, RunManifest, RunStatus, VerifyReport, MANIFEST_NAME};
pub use presets::{load_preset, PRESETS};
pub use registry::{Experiment, Registry, TypedExperiment};
