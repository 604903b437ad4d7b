//! Experiment configuration.
//!
//! A config file is TOML mirroring [`ExperimentConfig`]. Keys left out fall
//! back to the desk-scale defaults of the selected experiment, so a file
//! only needs the values it changes.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use rydvqa_core::dynamics::SimulatorConfig;
use rydvqa_core::hamiltonian::CostFunction;
use rydvqa_core::variational::{NelderMeadConfig, ObjectiveSpec};
use serde::{Deserialize, Serialize};

use crate::error::{io, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    SelfMitigation,
    DistanceHistogram,
    LandscapeSweep,
    DensitySweep,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::SelfMitigation => "self_mitigation",
            Experiment::DistanceHistogram => "distance_histogram",
            Experiment::LandscapeSweep => "landscape_sweep",
            Experiment::DensitySweep => "density_sweep",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    Unitary,
    Trajectory,
    Lindblad,
}

impl EngineKind {
    pub fn name(self) -> &'static str {
        match self {
            EngineKind::Unitary => "unitary",
            EngineKind::Trajectory => "trajectory",
            EngineKind::Lindblad => "lindblad",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        <Self as ValueEnum>::from_str(s, true)
            .map_err(|_| Error::Format(format!("unknown engine {s:?}")))
    }
}

/// How optimizer start points are chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum StartRule {
    /// Each duration uniform in `[0, π)`, one draw per restart.
    Uniform,
    /// Every duration equal to `value`.
    Constant { value: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandscapeConfig {
    pub t1: f64,
    pub tau1: f64,
    pub t2_grid: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HistogramConfig {
    pub bin_width: f64,
    /// Distances above this count towards the reported tail fraction.
    pub tail_threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub n_atoms: usize,
    pub densities: Vec<f64>,
    /// Spontaneous-emission rates `Γ`.
    pub gammas: Vec<f64>,
    /// Dephasing rate `γ`, shared by every run.
    pub gamma_dephasing: f64,
    pub n_graphs: usize,
    pub n_restarts: usize,
    pub engine: EngineKind,
    pub trajectories: usize,
    pub master_seed: u64,
    /// Worker threads; 0 uses every core.
    pub workers: usize,
    pub output_dir: PathBuf,
    pub stages: usize,
    pub start: StartRule,
    pub objective: ObjectiveSpec,
    pub cost: CostFunction,
    pub nelder_mead: NelderMeadConfig,
    pub simulator: SimulatorConfig,
    pub landscape: LandscapeConfig,
    pub histogram: HistogramConfig,
}

impl ExperimentConfig {
    /// Desk-scale defaults.
    pub fn defaults(experiment: Experiment) -> Self {
        let base = Self {
            experiment,
            n_atoms: 10,
            densities: vec![2.6],
            gammas: vec![0.0, 0.05, 0.1, 0.2],
            gamma_dephasing: 0.0,
            n_graphs: 20,
            n_restarts: 5,
            engine: EngineKind::Lindblad,
            trajectories: 2000,
            master_seed: 1,
            workers: 0,
            output_dir: PathBuf::from("out"),
            stages: 3,
            start: StartRule::Uniform,
            objective: ObjectiveSpec::mean(),
            cost: CostFunction::default(),
            nelder_mead: NelderMeadConfig::default(),
            simulator: SimulatorConfig::default(),
            landscape: LandscapeConfig {
                t1: 1.5,
                tau1: 1.0,
                t2_grid: (0..=40).map(|k| k as f64 * 0.1).collect(),
            },
            histogram: HistogramConfig {
                bin_width: 0.1,
                tail_threshold: 0.5,
            },
        };
        match experiment {
            Experiment::SelfMitigation => base,
            Experiment::DistanceHistogram => Self {
                gammas: vec![0.1],
                n_graphs: 30,
                ..base
            },
            Experiment::LandscapeSweep => Self {
                gammas: vec![0.0, 0.1],
                n_graphs: 3,
                n_restarts: 1,
                engine: EngineKind::Trajectory,
                trajectories: 1000,
                ..base
            },
            Experiment::DensitySweep => Self {
                densities: vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
                gammas: vec![0.0],
                n_restarts: 1,
                engine: EngineKind::Unitary,
                start: StartRule::Constant { value: PI },
                objective: ObjectiveSpec::cvar(20.0).expect("valid percentile"),
                ..base
            },
        }
    }

    /// Defaults for `experiment` overlaid with the TOML text `text`.
    pub fn from_toml(experiment: Experiment, text: &str) -> Result<Self> {
        let file: toml::Table = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        if let Some(v) = file.get("experiment") {
            let named: Experiment = v
                .clone()
                .try_into()
                .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
            if named != experiment {
                return Err(Error::Config(format!(
                    "file is for {}, not {}",
                    named.name(),
                    experiment.name()
                )));
            }
        }
        let mut merged = toml::Table::try_from(Self::defaults(experiment))
            .map_err(|e| Error::Config(e.to_string()))?;
        overlay(&mut merged, file);
        let cfg: Self = toml::Value::Table(merged)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(experiment: Experiment, path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(io(p))?;
                Self::from_toml(experiment, &text)
            }
            None => Ok(Self::defaults(experiment)),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.n_atoms == 0 {
            return fail("n_atoms must be positive");
        }
        if self.densities.is_empty() || self.densities.iter().any(|d| !(*d > 0.0 && d.is_finite()))
        {
            return fail("densities must be a non-empty list of positive numbers");
        }
        if self.gammas.is_empty() || self.gammas.iter().any(|g| !(*g >= 0.0 && g.is_finite())) {
            return fail("gammas must be a non-empty list of non-negative numbers");
        }
        if !(self.gamma_dephasing >= 0.0 && self.gamma_dephasing.is_finite()) {
            return fail("gamma_dephasing must be non-negative");
        }
        if self.n_graphs == 0 || self.n_restarts == 0 || self.stages == 0 {
            return fail("n_graphs, n_restarts and stages must be positive");
        }
        if self.engine == EngineKind::Trajectory && self.trajectories == 0 {
            return fail("the trajectory engine needs trajectories > 0");
        }
        if let StartRule::Constant { value } = self.start {
            if !value.is_finite() {
                return fail("constant start must be finite");
            }
        }
        if self.landscape.t2_grid.is_empty()
            || self
                .landscape
                .t2_grid
                .iter()
                .any(|t| !(*t >= 0.0 && t.is_finite()))
        {
            return fail("landscape t2_grid must be a non-empty list of non-negative durations");
        }
        if !(self.histogram.bin_width > 0.0 && self.histogram.bin_width.is_finite()) {
            return fail("histogram bin_width must be positive");
        }
        self.objective.validate()?;
        self.nelder_mead.validate()?;
        Ok(())
    }
}

fn overlay(base: &mut toml::Table, top: toml::Table) {
    for (k, v) in top {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(t)) if !is_tagged(&t) => overlay(b, t),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

// Tagged enums (objective, cost, start) are replaced wholesale so a new
// variant never inherits fields of the default one.
fn is_tagged(t: &toml::Table) -> bool {
    ["kind", "rule", "estimator"]
        .iter()
        .any(|k| t.contains_key(*k))
}
