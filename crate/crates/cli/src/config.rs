//! JSON run configuration.
//!
//! ```json
//! {
//!   "params": { "t_act": 800.0, "t_diff": 0.15, "k_a": 1.0, "k_r": 100.0,
//!               "k_m": 100.0, "k_1": 200.0, "alpha": 0.1 },
//!   "experiment": { "kind": "pulse_run", "a_diamond": 0.15 },
//!   "output_dir": "fig2"
//! }
//! ```
//!
//! `params` defaults to the reference parameter set and `output_dir` to the
//! experiment kind. The remaining `experiment` fields belong to the runner
//! named by `kind`; omitted ones take the runner's defaults.

use std::path::{Path, PathBuf};

use auxin_core::ModelParams;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, Result};
use crate::registry::Registry;

/// Environment variable naming the directory under which run directories
/// are created.
pub const OUT_ROOT_ENV: &str = "AUXIN_OUT_ROOT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "ModelParams::reference")]
    pub params: ModelParams,
    pub experiment: ExperimentSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

/// Experiment kind plus the runner-specific settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub kind: String,
    #[serde(flatten)]
    pub settings: Map<String, Value>,
}

impl ExperimentConfig {
    /// Config of `kind` with reference parameters and runner defaults.
    pub fn default_for(kind: &str) -> Self {
        ExperimentConfig {
            params: ModelParams::reference(),
            experiment: ExperimentSpec {
                kind: kind.to_string(),
                settings: Map::new(),
            },
            output_dir: None,
        }
    }

    pub fn kind(&self) -> &str {
        &self.experiment.kind
    }

    /// Run directory relative to the output root.
    pub fn run_dir_name(&self) -> PathBuf {
        self.output_dir
            .clone()
            .unwrap_or_else(|| PathBuf::from(self.kind()))
    }
}

/// Sets `path` (dotted, e.g. `experiment.a_diamond`) in a JSON document.
/// The value is read as JSON when it parses and as a string otherwise.
pub fn apply_override(doc: &mut Value, assignment: &str) -> Result<()> {
    let (path, raw) = assignment.split_once('=').ok_or_else(|| {
        CliError::Validation(format!(
            "override {assignment:?} is not of the form key=value"
        ))
    })?;
    let keys: Vec<&str> = path.split('.').collect();
    if keys.iter().any(|k| k.is_empty()) {
        return Err(CliError::Validation(format!(
            "override key {path:?} has an empty segment"
        )));
    }
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = doc;
    for key in &keys[..keys.len() - 1] {
        let obj = node.as_object_mut().ok_or_else(|| {
            CliError::Validation(format!("override {path:?} descends into a non-object"))
        })?;
        node = obj
            .entry(key.to_string())
            .or_insert_with(|| Value::Object(Map::new()));
    }
    let obj = node.as_object_mut().ok_or_else(|| {
        CliError::Validation(format!("override {path:?} descends into a non-object"))
    })?;
    obj.insert(keys[keys.len() - 1].to_string(), value);
    Ok(())
}

/// Parses a config document, applies overrides and validates it against the
/// registry, returning the config with every runner default filled in.
pub fn parse_config(
    text: &str,
    origin: &str,
    overrides: &[String],
    registry: &Registry,
) -> Result<ExperimentConfig> {
    let mut doc: Value = serde_json::from_str(text).map_err(|e| CliError::Parse {
        path: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    for o in overrides {
        apply_override(&mut doc, o)?;
    }
    resolve_value(doc, registry)
}

/// Validates an already parsed document.
pub fn resolve_value(doc: Value, registry: &Registry) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig =
        serde_json::from_value(doc).map_err(|e| CliError::Validation(e.to_string()))?;
    registry.resolve(cfg)
}

pub fn load_config_with(
    path: &Path,
    overrides: &[String],
    registry: &Registry,
) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::io(format!("reading {}", path.display()), e))?;
    parse_config(&text, &path.display().to_string(), overrides, registry)
}

/// Loads and validates a config file against the built-in runners.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    load_config_with(path, &[], &Registry::builtin())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn overrides_create_and_replace() {
        let mut doc = json!({"experiment": {"kind": "sweep"}});
        apply_override(&mut doc, "experiment.n_cells=300").unwrap();
        apply_override(&mut doc, "params.alpha=0.2").unwrap();
        apply_override(&mut doc, "output_dir=custom").unwrap();
        assert_eq!(doc["experiment"]["n_cells"], json!(300));
        assert_eq!(doc["params"]["alpha"], json!(0.2));
        assert_eq!(doc["output_dir"], json!("custom"));
        assert!(apply_override(&mut doc, "no_equals").is_err());
        assert!(apply_override(&mut doc, "experiment..x=1").is_err());
        assert!(apply_override(&mut doc, "experiment.kind.x=1").is_err());
    }

    #[test]
    fn parse_errors_carry_a_position() {
        let reg = Registry::builtin();
        match parse_config("{\n  \"experiment\": ,\n}", "inline", &[], &reg) {
            Err(CliError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            parse_config("", "empty", &[], &reg),
            Err(CliError::Parse { .. })
        ));
    }

    #[test]
    fn run_dir_defaults_to_the_kind() {
        let cfg = ExperimentConfig::default_for("profiles");
        assert_eq!(cfg.run_dir_name(), PathBuf::from("profiles"));
    }

    proptest::proptest! {
        #[test]
        fn override_round_trips(keys in proptest::collection::vec("[a-z_]{1,6}", 1..4), v in -1e6f64..1e6) {
            let mut doc = json!({});
            apply_override(&mut doc, &format!("{}={v}", keys.join("."))).unwrap();
            let pointer = format!("/{}", keys.join("/"));
            proptest::prop_assert_eq!(doc.pointer(&pointer).and_then(Value::as_f64), Some(v));
        }
    }
}
