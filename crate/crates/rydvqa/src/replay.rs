//! Recompute a single row of a points table from the row and its sidecar.

use std::path::Path;

use rydvqa_core::dynamics::NoiseModel;
use rydvqa_core::graph::UdGraph;
use rydvqa_core::variational::{Engine, VariationalProblem};
use serde::{Deserialize, Serialize};

use crate::config::{EngineKind, ExperimentConfig};
use crate::error::{Error, Result};
use crate::experiments::{measure, with_sampling_seed};
use crate::output::{read_json, sidecar_path, CsvFile};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub row: usize,
    pub label: String,
    pub params: Vec<f64>,
    pub stored_objective: f64,
    pub replayed_objective: f64,
    pub stored_mean_energy: f64,
    pub replayed_mean_energy: f64,
    pub stored_standard_error: f64,
    pub replayed_standard_error: f64,
    /// Every replayed value is bit-identical to the stored one.
    pub exact: bool,
}

#[derive(Deserialize)]
struct SidecarConfig {
    config: ExperimentConfig,
}

pub fn replay(csv: &Path, row: usize) -> Result<ReplayReport> {
    let cfg = read_json::<SidecarConfig>(&sidecar_path(csv))?.config;
    let file = CsvFile::read(csv)?;
    let stages = file.header.iter().filter(|h| h.starts_with("t_")).count();
    let params = (1..=stages)
        .map(|k| file.get::<f64>(row, &format!("t_{k}")))
        .collect::<Result<Vec<_>>>()?;

    let n_atoms: usize = file.get(row, "n_atoms")?;
    let density: f64 = file.get(row, "density")?;
    let graph_seed: u64 = file.get(row, "graph_seed")?;
    let graph = UdGraph::random(n_atoms, density, graph_seed)?;

    let engine_name: String = file.get(row, "engine")?;
    let engine = match EngineKind::parse(&engine_name)? {
        EngineKind::Unitary => Engine::Unitary,
        EngineKind::Lindblad => Engine::Lindblad,
        EngineKind::Trajectory => Engine::Trajectory {
            trajectories: file.get(row, "trajectories")?,
            seed: file.get(row, "engine_seed")?,
        },
    };
    let noise = NoiseModel::new(
        file.get(row, "gamma_se")?,
        file.get(row, "gamma_dephasing")?,
    )?;
    let objective = with_sampling_seed(cfg.objective, file.get(row, "sampling_seed")?);
    let problem =
        VariationalProblem::new(&graph, noise, engine, objective, cfg.cost, cfg.simulator)?;
    let (replayed_objective, stats) = measure(&problem, &params)?;

    let stored_objective: f64 = file.get(row, "objective")?;
    let stored_mean_energy: f64 = file.get(row, "mean_energy")?;
    let stored_standard_error: f64 = file.get(row, "standard_error")?;
    let same = |a: f64, b: f64| a.to_bits() == b.to_bits();
    Ok(ReplayReport {
        row,
        label: file.get(row, "label")?,
        params,
        exact: same(stored_objective, replayed_objective)
            && same(stored_mean_energy, stats.mean)
            && same(stored_standard_error, stats.standard_error),
        stored_objective,
        replayed_objective,
        stored_mean_energy,
        replayed_mean_energy: stats.mean,
        stored_standard_error,
        replayed_standard_error: stats.standard_error,
    })
}

impl ReplayReport {
    pub fn check(&self) -> Result<()> {
        if self.exact {
            Ok(())
        } else {
            Err(Error::Format(format!(
                "row {} did not replay exactly",
                self.row
            )))
        }
    }
}
