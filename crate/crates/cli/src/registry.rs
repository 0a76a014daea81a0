//! Experiment runners keyed by kind name.

use std::collections::BTreeMap;

use auxin_core::ModelParams;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::artifacts::Artifacts;
use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::experiments;

/// A runnable experiment. Settings arrive as the JSON object of the
/// `experiment` section without its `kind` key.
pub trait Experiment: Send + Sync {
    fn kind(&self) -> &'static str;
    fn summary(&self) -> &'static str;
    /// Parses and validates settings, returning them with defaults filled in.
    fn resolve(
        &self,
        params: &ModelParams,
        settings: &Map<String, Value>,
    ) -> Result<Map<String, Value>>;
    fn run(
        &self,
        params: &ModelParams,
        settings: &Map<String, Value>,
        out: &mut Artifacts,
    ) -> Result<()>;
}

/// Convenience layer: a runner with a typed settings struct. Any
/// implementor is an [`Experiment`].
pub trait TypedExperiment: Send + Sync {
    type Settings: Serialize + DeserializeOwned;
    const KIND: &'static str;
    const SUMMARY: &'static str;

    fn validate(&self, params: &ModelParams, settings: &Self::Settings) -> Result<()>;
    fn execute(
        &self,
        params: &ModelParams,
        settings: &Self::Settings,
        out: &mut Artifacts,
    ) -> Result<()>;
}

fn typed<T: TypedExperiment>(settings: &Map<String, Value>) -> Result<T::Settings> {
    serde_json::from_value(Value::Object(settings.clone()))
        .map_err(|e| CliError::Validation(format!("experiment ({}): {e}", T::KIND)))
}

impl<T: TypedExperiment> Experiment for T {
    fn kind(&self) -> &'static str {
        T::KIND
    }

    fn summary(&self) -> &'static str {
        T::SUMMARY
    }

    fn resolve(
        &self,
        params: &ModelParams,
        settings: &Map<String, Value>,
    ) -> Result<Map<String, Value>> {
        let s = typed::<T>(settings)?;
        self.validate(params, &s)?;
        match serde_json::to_value(&s)? {
            Value::Object(m) => Ok(m),
            _ => Err(CliError::Validation(format!(
                "settings of {} must be an object",
                T::KIND
            ))),
        }
    }

    fn run(
        &self,
        params: &ModelParams,
        settings: &Map<String, Value>,
        out: &mut Artifacts,
    ) -> Result<()> {
        let s = typed::<T>(settings)?;
        self.validate(params, &s)?;
        self.execute(params, &s, out)
    }
}

pub struct Registry {
    runners: BTreeMap<&'static str, Box<dyn Experiment>>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry {
            runners: BTreeMap::new(),
        }
    }

    /// All shipped runners.
    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(experiments::PulseRun));
        r.register(Box::new(experiments::Sweep));
        r.register(Box::new(experiments::Wavetrain));
        r.register(Box::new(experiments::Profiles));
        r.register(Box::new(experiments::LongWaveStudy));
        r
    }

    /// Adds a runner, replacing any previous one of the same kind.
    pub fn register(&mut self, runner: Box<dyn Experiment>) {
        self.runners.insert(runner.kind(), runner);
    }

    pub fn kinds(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.runners.keys().copied()
    }

    pub fn get(&self, kind: &str) -> Result<&dyn Experiment> {
        self.runners
            .get(kind)
            .map(|b| b.as_ref())
            .ok_or_else(|| CliError::UnknownKind {
                kind: kind.to_string(),
                known: self.kinds().collect::<Vec<_>>().join(", "),
            })
    }

    /// Validates the parameters and settings of `cfg`, filling in defaults.
    pub fn resolve(&self, mut cfg: ExperimentConfig) -> Result<ExperimentConfig> {
        cfg.params.validate()?;
        let runner = self.get(cfg.kind())?;
        cfg.experiment.settings = runner.resolve(&cfg.params, &cfg.experiment.settings)?;
        Ok(cfg)
    }
}

impl std::fmt::Debug for Registry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.kinds()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde::Deserialize;

    #[derive(Serialize, Deserialize)]
    #[serde(default, deny_unknown_fields)]
    struct EchoSettings {
        text: String,
    }

    impl Default for EchoSettings {
        fn default() -> Self {
            EchoSettings { text: "hi".into() }
        }
    }

    struct Echo;

    impl TypedExperiment for Echo {
        type Settings = EchoSettings;
        const KIND: &'static str = "echo";
        const SUMMARY: &'static str = "writes its text";

        fn validate(&self, _: &ModelParams, s: &EchoSettings) -> Result<()> {
            if s.text.is_empty() {
                return Err(CliError::Validation("text must not be empty".into()));
            }
            Ok(())
        }

        fn execute(&self, _: &ModelParams, s: &EchoSettings, out: &mut Artifacts) -> Result<()> {
            out.write_bytes("echo.txt", s.text.as_bytes())
        }
    }

    #[test]
    fn custom_runners_plug_in() {
        let mut reg = Registry::empty();
        reg.register(Box::new(Echo));
        let cfg = reg.resolve(ExperimentConfig::default_for("echo")).unwrap();
        assert_eq!(cfg.experiment.settings["text"], "hi");
        let mut bad = ExperimentConfig::default_for("echo");
        bad.experiment.settings.insert("text".into(), "".into());
        assert!(matches!(reg.resolve(bad), Err(CliError::Validation(_))));
        let mut unknown = ExperimentConfig::default_for("echo");
        unknown
            .experiment
            .settings
            .insert("colour".into(), "red".into());
        assert!(matches!(reg.resolve(unknown), Err(CliError::Validation(_))));
    }

    #[test]
    fn unknown_kinds_list_the_known_ones() {
        let reg = Registry::builtin();
        match reg.get("nope") {
            Err(CliError::UnknownKind { known, .. }) => {
                assert_eq!(known, "longwave, profiles, pulse_run, sweep, wavetrain")
            }
            _ => panic!("expected UnknownKind"),
        }
    }
}
