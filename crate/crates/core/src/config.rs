//! Run configuration read from TOML.

use crate::error::{Error, Result};
use crate::evaluation::{Experiment, Method, OverlayRequest};
use crate::simulator::{AnomalyKind, Scenario};
use crate::solver::SolverConfig;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub methods: Vec<Method>,
    pub n_samples: usize,
    pub base_seed: u64,
    /// Noise levels crossed with every anomaly setting.
    pub alphas: Vec<f64>,
    /// Anomaly settings; empty means the reference battery.
    pub anomalies: Vec<AnomalyKind>,
    pub jobs: Option<usize>,
    pub overlays: Vec<OverlayRequest>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            methods: Method::reference_set(),
            n_samples: 50,
            base_seed: 1,
            alphas: vec![0.05, 0.1],
            anomalies: Vec::new(),
            jobs: None,
            overlays: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IoConfig {
    pub out_dir: PathBuf,
}

impl Default for IoConfig {
    fn default() -> Self {
        IoConfig {
            out_dir: PathBuf::from("out"),
        }
    }
}

/// Everything one run needs: the scenario to simulate, solver settings, the
/// experiment battery and output location.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub solver: SolverConfig,
    pub experiment: ExperimentConfig,
    pub io: IoConfig,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        let config: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// The fully resolved configuration, defaults included.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Replaces the scenario seed and the experiment base seed.
    pub fn set_seed(&mut self, seed: u64) {
        self.scenario.seed = seed;
        self.experiment.base_seed = seed;
    }

    pub fn validate(&self) -> Result<()> {
        let keyed = |key: &str, e: Error| match e {
            Error::Parameter(msg) | Error::Config(msg) => Error::Config(format!("{key}: {msg}")),
            other => other,
        };
        self.scenario.validate().map_err(|e| keyed("scenario", e))?;
        self.solver.validate().map_err(|e| keyed("solver", e))?;
        let depth = self.solver.required_depth();
        if self.scenario.periods % (1usize << depth) != 0 {
            return Err(Error::Config(format!(
                "scenario.periods: {} is not divisible by 2^{depth} required by solver.q/box_depth",
                self.scenario.periods
            )));
        }
        let e = &self.experiment;
        if e.n_samples == 0 {
            return Err(Error::Config("experiment.n_samples: must be at least 1".into()));
        }
        if e.methods.is_empty() {
            return Err(Error::Config("experiment.methods: must not be empty".into()));
        }
        if e.alphas.is_empty() || e.alphas.iter().any(|a| !(*a >= 0.0)) {
            return Err(Error::Config(
                "experiment.alphas: need at least one nonnegative noise level".into(),
            ));
        }
        if e.jobs == Some(0) {
            return Err(Error::Config("experiment.jobs: must be at least 1".into()));
        }
        Ok(())
    }

    /// Scenarios of the battery: every anomaly setting at every noise level,
    /// sharing the remaining fields of `scenario`.
    pub fn scenarios(&self) -> Vec<Scenario> {
        let kinds = if self.experiment.anomalies.is_empty() {
            AnomalyKind::reference_battery()
        } else {
            self.experiment.anomalies.clone()
        };
        let mut out = Vec::new();
        for &alpha in &self.experiment.alphas {
            for kind in &kinds {
                out.push(Scenario {
                    anomaly: kind.clone(),
                    noise_alpha: alpha,
                    ..self.scenario.clone()
                });
            }
        }
        out
    }

    pub fn experiment(&self) -> Experiment {
        Experiment {
            scenarios: self.scenarios(),
            methods: self.experiment.methods.clone(),
            n_samples: self.experiment.n_samples,
            base_seed: self.experiment.base_seed,
            solver: self.solver.clone(),
            jobs: self.experiment.jobs,
            overlays: self.experiment.overlays.clone(),
        }
    }
}
