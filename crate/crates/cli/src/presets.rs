//! Configurations shipped with the binary.

use crate::config::{parse_config, ExperimentConfig};
use crate::error::{CliError, Result};
use crate::registry::Registry;

/// `(name, JSON document)` pairs.
pub const PRESETS: &[(&str, &str)] = &[
    ("fig2", include_str!("../presets/fig2.json")),
    ("fig3", include_str!("../presets/fig3.json")),
    ("fig5", include_str!("../presets/fig5.json")),
    ("longwave", include_str!("../presets/longwave.json")),
    ("profiles", include_str!("../presets/profiles.json")),
];

pub fn preset_text(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| {
            let known: Vec<&str> = PRESETS.iter().map(|(n, _)| *n).collect();
            CliError::Validation(format!(
                "unknown preset {name:?} (known: {})",
                known.join(", ")
            ))
        })
}

pub fn load_preset(
    name: &str,
    overrides: &[String],
    registry: &Registry,
) -> Result<ExperimentConfig> {
    parse_config(
        preset_text(name)?,
        &format!("preset {name}"),
        overrides,
        registry,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_resolves() {
        let reg = Registry::builtin();
        for (name, _) in PRESETS {
            let cfg = load_preset(name, &[], &reg).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(reg.get(cfg.kind()).is_ok());
        }
        assert!(preset_text("fig9").is_err());
    }
}
