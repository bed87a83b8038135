//! On-disk run description accepted by `csalsa solve` and `csalsa batch`.

use std::path::Path;

use csalsa::bench::{ExperimentJob, ExperimentSpec, OutputPaths, SolverSettings};
use csalsa::{Error, Result};
use serde::{Deserialize, Serialize};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// An experiment, solver overrides and output paths. Unknown keys anywhere in
/// the document are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub experiment: ExperimentSpec,
    #[serde(default)]
    pub solver: SolverSettings,
    #[serde(default)]
    pub outputs: OutputPaths,
}

impl RunConfig {
    pub fn new(experiment: ExperimentSpec, solver: SolverSettings, outputs: OutputPaths) -> Self {
        Self {
            schema_version: CONFIG_SCHEMA_VERSION,
            experiment,
            solver,
            outputs,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        if cfg.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::Format(format!(
                "unsupported schema_version {} (expected {CONFIG_SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        cfg.experiment.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Io { .. } => e,
            other => Error::Format(format!("{}: {other}", path.display())),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn into_job(self) -> ExperimentJob {
        ExperimentJob {
            spec: self.experiment,
            settings: self.solver,
            outputs: self.outputs,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunConfig {
        RunConfig::new(
            ExperimentSpec::mri_preset(64, 22),
            SolverSettings::default(),
            OutputPaths::default(),
        )
    }

    #[test]
    fn round_trip() {
        let cfg = sample();
        assert_eq!(RunConfig::from_json(&cfg.to_json().unwrap()).unwrap(), cfg);
    }

    #[test]
    fn typo_names_the_key() {
        let mut v = serde_json::to_value(sample()).unwrap();
        v["solver"]["epsilonn"] = serde_json::json!(0.5);
        let err = RunConfig::from_json(&v.to_string())
            .unwrap_err()
            .to_string();
        assert!(err.contains("epsilonn"), "{err}");
    }

    #[test]
    fn wrong_version_rejected() {
        let mut v = serde_json::to_value(sample()).unwrap();
        v["schema_version"] = serde_json::json!(7);
        assert!(RunConfig::from_json(&v.to_string()).is_err());
    }

    #[test]
    fn sections_default() {
        let v = serde_json::json!({
            "schema_version": 1,
            "experiment": serde_json::to_value(ExperimentSpec::mri_preset(64, 8)).unwrap(),
        });
        let cfg = RunConfig::from_json(&v.to_string()).unwrap();
        assert_eq!(cfg.solver, SolverSettings::default());
    }
}
