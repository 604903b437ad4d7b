//! The four numerical studies. Each returns its tables in canonical order
//! (density, graph, noise rate, restart), independent of the worker count.

mod density;
mod distance;
mod landscape;
mod mitigation;

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rydvqa_core::dynamics::{NoiseModel, Simulator};
use rydvqa_core::graph::UdGraph;
use rydvqa_core::variational::{
    uniform_start, EnergyStatistics, Engine, Estimator, ObjectiveKind, ObjectiveSpec,
    OptimizationRecord, VariationalProblem,
};

pub use density::density_sweep;
pub use distance::distance_histogram;
pub use landscape::landscape_sweep;
pub use mitigation::self_mitigation;

use crate::config::{EngineKind, Experiment, ExperimentConfig, StartRule};
use crate::error::{Error, Result};
use crate::output::{self, header, records_table, seed_cell, Cell, LabeledRecord, Table};
use crate::seeds;

/// Tables and optimizer records of one run.
#[derive(Clone, Debug, Default)]
pub struct ExperimentOutput {
    pub tables: Vec<Table>,
    pub records: Vec<LabeledRecord>,
}

impl ExperimentOutput {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Write every table (CSV plus sidecar) and the records under `dir`.
    pub fn write(&self, dir: &Path, cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
        let mut paths = Vec::new();
        for t in &self.tables {
            paths.push(output::write_table(dir, t, cfg)?);
        }
        if !self.records.is_empty() {
            let name = format!("{}_records", cfg.experiment.name());
            paths.push(output::write_table(
                dir,
                &records_table(&name, cfg.stages, &self.records),
                cfg,
            )?);
            let json = dir.join(format!("{name}_trace.json"));
            output::write_json(&json, &self.records)?;
            paths.push(json);
        }
        Ok(paths)
    }
}

/// Run `cfg.experiment` on a pool of `cfg.workers` threads.
pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if cfg.workers > 0 {
        pool = pool.num_threads(cfg.workers);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| match cfg.experiment {
        Experiment::SelfMitigation => self_mitigation(cfg),
        Experiment::DistanceHistogram => distance_histogram(cfg),
        Experiment::LandscapeSweep => landscape_sweep(cfg),
        Experiment::DensitySweep => density_sweep(cfg),
    })
}

/// One generated graph.
#[derive(Clone, Debug)]
pub struct Instance {
    pub density_index: usize,
    pub density: f64,
    pub graph_id: usize,
    pub graph_seed: u64,
    pub graph: UdGraph,
}

pub fn instances(cfg: &ExperimentConfig) -> Result<Vec<Instance>> {
    let mut out = Vec::with_capacity(cfg.densities.len() * cfg.n_graphs);
    for (density_index, &density) in cfg.densities.iter().enumerate() {
        for graph_id in 0..cfg.n_graphs {
            let graph_seed = seeds::graph(cfg.master_seed, density_index, graph_id);
            out.push(Instance {
                density_index,
                density,
                graph_id,
                graph_seed,
                graph: UdGraph::random(cfg.n_atoms, density, graph_seed)?,
            });
        }
    }
    Ok(out)
}

/// Everything that determines how a point on one graph is scored.
#[derive(Clone, Copy, Debug)]
pub struct Setup<'a> {
    pub cfg: &'a ExperimentConfig,
    pub inst: &'a Instance,
}

impl<'a> Setup<'a> {
    pub fn new(cfg: &'a ExperimentConfig, inst: &'a Instance) -> Self {
        Self { cfg, inst }
    }

    pub fn engine_seed(&self) -> u64 {
        match self.cfg.engine {
            EngineKind::Trajectory => seeds::trajectories(
                self.cfg.master_seed,
                self.inst.density_index,
                self.inst.graph_id,
            ),
            _ => 0,
        }
    }

    pub fn engine(&self) -> Engine {
        match self.cfg.engine {
            EngineKind::Unitary => Engine::Unitary,
            EngineKind::Lindblad => Engine::Lindblad,
            EngineKind::Trajectory => Engine::Trajectory {
                trajectories: self.cfg.trajectories,
                seed: self.engine_seed(),
            },
        }
    }

    pub fn sampling_seed(&self) -> u64 {
        match self.cfg.objective.estimator {
            Estimator::Sampled { .. } => seeds::sampling(
                self.cfg.master_seed,
                self.inst.density_index,
                self.inst.graph_id,
            ),
            Estimator::Exact => 0,
        }
    }

    pub fn objective(&self) -> ObjectiveSpec {
        with_sampling_seed(self.cfg.objective, self.sampling_seed())
    }

    pub fn noise(&self, gamma_se: f64) -> Result<NoiseModel> {
        Ok(NoiseModel::new(gamma_se, self.cfg.gamma_dephasing)?)
    }

    pub fn simulator(&self) -> Result<Simulator> {
        Ok(Simulator::new(&self.inst.graph, self.cfg.simulator)?)
    }

    pub fn problem(&self, sim: &Simulator, noise: NoiseModel) -> Result<VariationalProblem> {
        Ok(VariationalProblem::from_simulator(
            sim.clone(),
            &self.inst.graph,
            noise,
            self.engine(),
            self.objective(),
            self.cfg.cost,
        )?)
    }

    pub fn start(&self, restart: usize) -> Vec<f64> {
        match self.cfg.start {
            StartRule::Uniform => uniform_start(
                self.cfg.stages,
                seeds::start(
                    self.cfg.master_seed,
                    self.inst.density_index,
                    self.inst.graph_id,
                    restart,
                ),
            ),
            StartRule::Constant { value } => vec![value; self.cfg.stages],
        }
    }

    /// Optimize from every restart's start point, in restart order.
    pub fn optimize_all(&self, problem: &VariationalProblem) -> Result<Vec<OptimizationRecord>> {
        (0..self.cfg.n_restarts)
            .into_par_iter()
            .map(|r| Ok(problem.optimize(&self.start(r), &self.cfg.nelder_mead, r)?))
            .collect()
    }

    pub fn point(
        &self,
        problem: &VariationalProblem,
        restart: usize,
        label: &str,
        params: &[f64],
    ) -> Result<Point> {
        let (objective, stats) = measure(problem, params)?;
        Ok(Point {
            graph_id: self.inst.graph_id,
            restart,
            label: label.to_string(),
            density: self.inst.density,
            n_atoms: self.inst.graph.n_atoms(),
            graph_seed: self.inst.graph_seed,
            gamma_se: problem.noise().gamma_se,
            gamma_dephasing: problem.noise().gamma_deph,
            engine: self.cfg.engine,
            trajectories: match self.cfg.engine {
                EngineKind::Trajectory => self.cfg.trajectories,
                _ => 0,
            },
            engine_seed: self.engine_seed(),
            sampling_seed: self.sampling_seed(),
            params: params.to_vec(),
            objective,
            mean_energy: stats.mean,
            standard_error: stats.standard_error,
            approximation_ratio: problem.approximation_ratio(objective)?,
            optimum: problem.optimum(),
        })
    }

    pub fn labeled(&self, gamma_se: f64, label: &str, record: OptimizationRecord) -> LabeledRecord {
        LabeledRecord {
            graph_id: self.inst.graph_id,
            density: self.inst.density,
            gamma_se,
            label: label.to_string(),
            record,
        }
    }
}

pub fn with_sampling_seed(spec: ObjectiveSpec, seed: u64) -> ObjectiveSpec {
    match spec.estimator {
        Estimator::Sampled { shots, .. } => ObjectiveSpec {
            estimator: Estimator::Sampled { shots, seed },
            ..spec
        },
        Estimator::Exact => spec,
    }
}

/// Objective plus `⟨C⟩` statistics, with one state preparation when the
/// objective is the exact mean energy.
pub fn measure(problem: &VariationalProblem, params: &[f64]) -> Result<(f64, EnergyStatistics)> {
    let exact_mean = problem.objective().kind == ObjectiveKind::MeanEnergy
        && problem.objective().estimator == Estimator::Exact;
    if matches!(problem.engine(), Engine::Trajectory { .. }) {
        let stats = problem.energy_statistics(params)?;
        let objective = if exact_mean {
            stats.mean
        } else {
            problem.evaluate(params)?
        };
        return Ok((objective, stats));
    }
    let s = problem.score(params)?;
    Ok((
        s.objective,
        EnergyStatistics {
            mean: s.mean_energy,
            standard_error: 0.0,
        },
    ))
}

/// Lowest objective; ties go to the earliest restart.
pub fn best(records: &[OptimizationRecord]) -> &OptimizationRecord {
    records
        .iter()
        .min_by(|a, b| a.best_objective.total_cmp(&b.best_objective))
        .expect("at least one restart")
}

/// A scored parameter point with everything needed to recompute it.
#[derive(Clone, Debug, PartialEq)]
pub struct Point {
    pub graph_id: usize,
    pub restart: usize,
    pub label: String,
    pub density: f64,
    pub n_atoms: usize,
    pub graph_seed: u64,
    pub gamma_se: f64,
    pub gamma_dephasing: f64,
    pub engine: EngineKind,
    pub trajectories: usize,
    pub engine_seed: u64,
    pub sampling_seed: u64,
    pub params: Vec<f64>,
    pub objective: f64,
    pub mean_energy: f64,
    pub standard_error: f64,
    pub approximation_ratio: f64,
    /// `C_opt` of the graph (not written to the points table).
    pub optimum: f64,
}

pub fn points_table(name: &str, stages: usize, points: &[Point]) -> Table {
    let mut t = Table::new(
        name,
        header(
            &[
                "graph_id",
                "restart",
                "label",
                "density",
                "n_atoms",
                "graph_seed",
                "gamma_se",
                "gamma_dephasing",
                "engine",
                "trajectories",
                "engine_seed",
                "sampling_seed",
            ],
            stages,
            &[
                "objective",
                "mean_energy",
                "standard_error",
                "approximation_ratio",
            ],
        ),
    );
    for p in points {
        let mut row = vec![
            p.graph_id.into(),
            p.restart.into(),
            p.label.as_str().into(),
            p.density.into(),
            p.n_atoms.into(),
            seed_cell(p.graph_seed),
            p.gamma_se.into(),
            p.gamma_dephasing.into(),
            p.engine.name().into(),
            p.trajectories.into(),
            seed_cell(p.engine_seed),
            seed_cell(p.sampling_seed),
        ];
        row.extend(p.params.iter().map(|&x| Cell::from(x)));
        row.extend([
            p.objective.into(),
            p.mean_energy.into(),
            p.standard_error.into(),
            p.approximation_ratio.into(),
        ]);
        t.push(row);
    }
    t
}

/// Mean and sample standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, 0.0);
    }
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
    (m, v.sqrt())
}

/// Mean and standard error of the mean.
pub fn mean_sem(xs: &[f64]) -> (f64, f64) {
    let (m, s) = mean_std(xs);
    (m, s / (xs.len() as f64).sqrt())
}
