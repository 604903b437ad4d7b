//! Scoring pulse schedules on one graph and optimizing them.

use alloc::vec::Vec;

use super::nelder_mead::{self, NelderMeadConfig};
use super::objective::{evaluate_objective, mean_energy, ObjectiveSpec};
use crate::dynamics::{
    DensityMatrix, NoiseModel, PulseSchedule, Simulator, SimulatorConfig, StateVector, Trajectory,
    TrajectoryEngine,
};
use crate::error::{Error, Result};
use crate::graph::UdGraph;
use crate::hamiltonian::{CostFunction, CostSpec};
use crate::rng::derive_seed;
use crate::DELTA_0;

/// How states are prepared for scoring.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "engine", rename_all = "snake_case"))]
pub enum Engine {
    Unitary,
    /// Average of the measurement distributions of `trajectories` runs;
    /// trajectory `k` uses `derive_seed(seed, [k])` at every evaluation.
    Trajectory {
        trajectories: usize,
        seed: u64,
    },
    Lindblad,
}

/// Optimizer trace entry.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TraceEntry {
    pub evaluation: usize,
    pub iteration: usize,
    /// Durations as proposed by the simplex (before `|·|`).
    pub params: Vec<f64>,
    pub objective: f64,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OptimizationRecord {
    pub restart_index: usize,
    pub initial_params: Vec<f64>,
    /// Physical (non-negative) durations of the best evaluation.
    pub best_params: Vec<f64>,
    pub best_objective: f64,
    /// `best_objective / C_opt`.
    pub approximation_ratio: f64,
    pub converged: bool,
    pub evaluations: usize,
    pub trace: Vec<TraceEntry>,
}

/// `r = final / C_opt` with `C_opt = −bias · |MIS|`.
pub fn approximation_ratio(final_objective: f64, graph: &UdGraph, spec: &CostSpec) -> Result<f64> {
    let mis = graph.solve_mis_exact()?.size;
    ratio(final_objective, mis, spec.linear_bias)
}

fn ratio(final_objective: f64, mis_size: usize, bias: f64) -> Result<f64> {
    if mis_size == 0 {
        return Err(Error::invalid("approximation ratio needs a non-empty MIS"));
    }
    Ok(final_objective / (-bias * mis_size as f64))
}

/// Euclidean distance between two duration vectors.
pub fn param_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::invalid("schedules have different stage structure"));
    }
    Ok(libm::sqrt(
        a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum(),
    ))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Score {
    pub objective: f64,
    pub mean_energy: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyStatistics {
    pub mean: f64,
    pub standard_error: f64,
}

/// One graph, one noise model, one engine and one objective.
#[derive(Clone, Debug)]
pub struct VariationalProblem {
    sim: Simulator,
    noise: NoiseModel,
    engine: Engine,
    objective: ObjectiveSpec,
    costs: Vec<f64>,
    mis_size: usize,
    bias: f64,
    trajectories: Option<TrajectoryEngine>,
}

impl VariationalProblem {
    pub fn new(
        graph: &UdGraph,
        noise: NoiseModel,
        engine: Engine,
        objective: ObjectiveSpec,
        cost: CostFunction,
        config: SimulatorConfig,
    ) -> Result<Self> {
        Self::check(graph.n_atoms(), engine, &config)?;
        let sim = Simulator::new(graph, config)?;
        Self::from_simulator(sim, graph, noise, engine, objective, cost)
    }

    /// Reuse a simulator already built for `graph` (the mixer spectrum does
    /// not depend on the noise).
    pub fn from_simulator(
        sim: Simulator,
        graph: &UdGraph,
        noise: NoiseModel,
        engine: Engine,
        objective: ObjectiveSpec,
        cost: CostFunction,
    ) -> Result<Self> {
        if sim.n_atoms() != graph.n_atoms() {
            return Err(Error::invalid(
                "simulator and graph have different atom counts",
            ));
        }
        Self::check(graph.n_atoms(), engine, sim.config())?;
        objective.validate()?;
        let costs = cost.table(graph)?;
        let mis_size = graph.solve_mis_exact()?.size;
        let bias = match cost {
            CostFunction::Abstract(spec) => spec.linear_bias,
            CostFunction::PhysicalDiagonal { .. } => DELTA_0,
        };
        let trajectories = match engine {
            Engine::Trajectory { .. } if !noise.is_noiseless() => {
                Some(sim.trajectory_engine(&noise)?)
            }
            _ => None,
        };
        Ok(Self {
            sim,
            noise,
            engine,
            objective,
            costs,
            mis_size,
            bias,
            trajectories,
        })
    }

    fn check(n_atoms: usize, engine: Engine, config: &SimulatorConfig) -> Result<()> {
        match engine {
            Engine::Lindblad if n_atoms > config.max_density_atoms => Err(Error::limit(
                "density-matrix atoms",
                config.max_density_atoms,
                n_atoms,
            )),
            Engine::Trajectory {
                trajectories: 0, ..
            } => Err(Error::invalid(
                "trajectory engine needs at least one trajectory",
            )),
            _ => Ok(()),
        }
    }

    pub fn simulator(&self) -> &Simulator {
        &self.sim
    }

    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    pub fn engine(&self) -> Engine {
        self.engine
    }

    pub fn objective(&self) -> &ObjectiveSpec {
        &self.objective
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn mis_size(&self) -> usize {
        self.mis_size
    }

    /// `C_opt = −bias · |MIS|`.
    pub fn optimum(&self) -> f64 {
        -self.bias * self.mis_size as f64
    }

    pub fn approximation_ratio(&self, value: f64) -> Result<f64> {
        ratio(value, self.mis_size, self.bias)
    }

    fn schedule(params: &[f64]) -> Result<PulseSchedule> {
        PulseSchedule::new(params.iter().map(|p| p.abs()).collect())
    }

    /// The individual trajectories behind a trajectory-engine evaluation.
    pub fn trajectories(&self, params: &[f64]) -> Result<Vec<Trajectory>> {
        let mut out = Vec::new();
        self.for_each_trajectory(params, |t| {
            out.push(t);
            Ok(())
        })?;
        Ok(out)
    }

    fn for_each_trajectory(
        &self,
        params: &[f64],
        mut f: impl FnMut(Trajectory) -> Result<()>,
    ) -> Result<()> {
        let Engine::Trajectory { trajectories, seed } = self.engine else {
            return Err(Error::invalid("not a trajectory engine"));
        };
        let schedule = Self::schedule(params)?;
        for k in 0..trajectories as u64 {
            let s = derive_seed(seed, &[k]);
            f(match &self.trajectories {
                Some(eng) => eng.run(&self.sim, &schedule, s)?,
                None => self.sim.evolve_trajectory(&schedule, &self.noise, s)?,
            })?;
        }
        Ok(())
    }

    /// Measurement distribution after the schedule `|params|`.
    pub fn distribution(&self, params: &[f64]) -> Result<Vec<f64>> {
        let schedule = Self::schedule(params)?;
        let n = self.sim.n_atoms();
        if self.noise.is_noiseless() {
            return self
                .sim
                .evolve_unitary(&schedule, &StateVector::ground(n)?)?
                .distribution();
        }
        match self.engine {
            Engine::Unitary => self
                .sim
                .evolve_unitary(&schedule, &StateVector::ground(n)?)?
                .distribution(),
            Engine::Lindblad => self
                .sim
                .evolve_lindblad(&schedule, &self.noise, &DensityMatrix::ground(n)?)?
                .distribution(),
            Engine::Trajectory { trajectories, .. } => {
                let mut acc = PairwiseSum::default();
                self.for_each_trajectory(params, |tr| {
                    acc.push(tr.state.amplitudes().iter().map(|a| a.norm_sqr()).collect());
                    Ok(())
                })?;
                let mut p = acc.finish().unwrap_or_default();
                let k = trajectories as f64;
                p.iter_mut().for_each(|a| *a /= k);
                Ok(p)
            }
        }
    }

    /// Objective at `|params|`.
    pub fn evaluate(&self, params: &[f64]) -> Result<f64> {
        evaluate_objective(&self.distribution(params)?, &self.costs, &self.objective)
    }

    /// Objective and exact mean energy from a single state preparation.
    pub fn score(&self, params: &[f64]) -> Result<Score> {
        let p = self.distribution(params)?;
        Ok(Score {
            objective: evaluate_objective(&p, &self.costs, &self.objective)?,
            mean_energy: mean_energy(&p, &self.costs)?,
        })
    }

    /// `⟨C⟩` with its standard error over trajectories (zero for the
    /// deterministic engines and for noiseless runs).
    pub fn energy_statistics(&self, params: &[f64]) -> Result<EnergyStatistics> {
        let Engine::Trajectory { trajectories, .. } = self.engine else {
            return Ok(EnergyStatistics {
                mean: self.mean_energy(params)?,
                standard_error: 0.0,
            });
        };
        if self.noise.is_noiseless() {
            return Ok(EnergyStatistics {
                mean: self.mean_energy(params)?,
                standard_error: 0.0,
            });
        }
        let mut acc = PairwiseSum::default();
        let mut energies = Vec::with_capacity(trajectories);
        self.for_each_trajectory(params, |tr| {
            let p: Vec<f64> = tr.state.amplitudes().iter().map(|a| a.norm_sqr()).collect();
            energies.push(p.iter().zip(&self.costs).map(|(p, c)| p * c).sum::<f64>());
            acc.push(p);
            Ok(())
        })?;
        let mut p = acc.finish().unwrap_or_default();
        let k = trajectories as f64;
        p.iter_mut().for_each(|a| *a /= k);
        let mean = mean_energy(&p, &self.costs)?;
        let standard_error = if trajectories > 1 {
            let m = energies.iter().sum::<f64>() / k;
            let var = energies.iter().map(|e| (e - m) * (e - m)).sum::<f64>() / (k - 1.0);
            libm::sqrt(var / k)
        } else {
            0.0
        };
        Ok(EnergyStatistics {
            mean,
            standard_error,
        })
    }

    /// Exact mean energy `⟨C⟩` at `|params|`, whatever the objective.
    pub fn mean_energy(&self, params: &[f64]) -> Result<f64> {
        mean_energy(&self.distribution(params)?, &self.costs)
    }

    /// Nelder–Mead from `initial`.
    pub fn optimize(
        &self,
        initial: &[f64],
        config: &NelderMeadConfig,
        restart_index: usize,
    ) -> Result<OptimizationRecord> {
        Self::schedule(initial)?;
        let m = nelder_mead::minimize(|x| self.evaluate(x), initial, config)?;
        let trace = m
            .evaluations
            .into_iter()
            .enumerate()
            .map(|(i, e)| TraceEntry {
                evaluation: i,
                iteration: e.iteration,
                params: e.params,
                objective: e.value,
            })
            .collect::<Vec<_>>();
        Ok(OptimizationRecord {
            restart_index,
            initial_params: initial.to_vec(),
            best_params: m.params.iter().map(|p| p.abs()).collect(),
            best_objective: m.value,
            approximation_ratio: self.approximation_ratio(m.value)?,
            converged: m.converged,
            evaluations: trace.len(),
            trace,
        })
    }
}

/// Streaming pairwise summation of equal-length vectors: partial sums are
/// merged like a binary counter, so rounding error grows with `log K`.
#[derive(Default)]
struct PairwiseSum {
    stack: Vec<(u32, Vec<f64>)>,
}

impl PairwiseSum {
    fn push(&mut self, mut v: Vec<f64>) {
        let mut level = 0;
        while let Some((top, _)) = self.stack.last() {
            if *top != level {
                break;
            }
            let (_, w) = self.stack.pop().unwrap();
            v.iter_mut().zip(&w).for_each(|(a, b)| *a += b);
            level += 1;
        }
        self.stack.push((level, v));
    }

    fn finish(mut self) -> Option<Vec<f64>> {
        let mut acc = self.stack.pop()?.1;
        while let Some((_, w)) = self.stack.pop() {
            acc.iter_mut().zip(&w).for_each(|(a, b)| *a += b);
        }
        Some(acc)
    }
}

/// Build a problem with default simulator settings and optimize it once.
pub fn optimize(
    graph: &UdGraph,
    noise: &NoiseModel,
    objective: &ObjectiveSpec,
    engine: Engine,
    initial: &PulseSchedule,
    config: &NelderMeadConfig,
) -> Result<OptimizationRecord> {
    VariationalProblem::new(
        graph,
        *noise,
        engine,
        *objective,
        CostFunction::default(),
        SimulatorConfig::default(),
    )?
    .optimize(initial.durations(), config, 0)
}
