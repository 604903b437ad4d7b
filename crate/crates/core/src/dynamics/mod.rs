//! Time evolution through a pulse schedule: closed-system, quantum-jump
//! trajectories and the Lindblad master equation
//!
//! `∂ρ/∂t = −i[H, ρ] + Γ Σ_j D[σ_j⁻]ρ + γ Σ_j D[n_j]ρ`.
//!
//! Every stage Hamiltonian is constant, so the default propagation is
//! spectral: the mixer is diagonalized once per graph and the cost stage is
//! already diagonal. Dissipative evolution is Strang-split between that exact
//! unitary and the exactly solvable single-atom dissipators, with step-doubling
//! error control. A matrix-free Dormand–Prince route is available through
//! [`Propagation::RungeKutta`].

mod effective;
mod lindblad;
mod simulator;
mod state;
mod trajectory;

use alloc::vec::Vec;

use crate::error::{Error, Result};

pub use simulator::{Propagation, Simulator, SimulatorConfig};
pub use state::{sample_outcomes, DensityMatrix, StateVector, NORMALIZATION_TOLERANCE};
pub use trajectory::{Channel, JumpRecord, Trajectory, TrajectoryEngine};

use crate::graph::UdGraph;

/// Which Hamiltonian drives a stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum StageKind {
    Mixer,
    Cost,
}

/// Alternating stage durations `(t₁, τ₁, t₂, τ₂, …)` starting with a mixer.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PulseSchedule {
    durations: Vec<f64>,
}

impl PulseSchedule {
    pub fn new(durations: Vec<f64>) -> Result<Self> {
        if let Some(d) = durations.iter().find(|d| !(**d >= 0.0) || !d.is_finite()) {
            return Err(Error::InvalidArgument(alloc::format!(
                "stage durations must be finite and non-negative, got {d}"
            )));
        }
        Ok(Self { durations })
    }

    /// The three-parameter schedule `[(M, t₁), (C, τ₁), (M, t₂)]`.
    pub fn three(t1: f64, tau1: f64, t2: f64) -> Result<Self> {
        Self::new(alloc::vec![t1, tau1, t2])
    }

    pub fn durations(&self) -> &[f64] {
        &self.durations
    }

    pub fn len(&self) -> usize {
        self.durations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.durations.is_empty()
    }

    pub fn kind(index: usize) -> StageKind {
        if index % 2 == 0 {
            StageKind::Mixer
        } else {
            StageKind::Cost
        }
    }

    pub fn stages(&self) -> impl Iterator<Item = (StageKind, f64)> + '_ {
        self.durations
            .iter()
            .enumerate()
            .map(|(i, &d)| (Self::kind(i), d))
    }

    pub fn total_time(&self) -> f64 {
        self.durations.iter().sum()
    }
}

/// Spontaneous emission rate `Γ` and dephasing rate `γ` (units of `Ω₀`).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NoiseModel {
    pub gamma_se: f64,
    pub gamma_deph: f64,
}

impl NoiseModel {
    pub fn new(gamma_se: f64, gamma_deph: f64) -> Result<Self> {
        if !(gamma_se >= 0.0)
            || !(gamma_deph >= 0.0)
            || !gamma_se.is_finite()
            || !gamma_deph.is_finite()
        {
            return Err(Error::invalid(
                "noise rates must be finite and non-negative",
            ));
        }
        Ok(Self {
            gamma_se,
            gamma_deph,
        })
    }

    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn emission(gamma_se: f64) -> Result<Self> {
        Self::new(gamma_se, 0.0)
    }

    pub fn is_noiseless(&self) -> bool {
        self.gamma_se == 0.0 && self.gamma_deph == 0.0
    }

    /// Anti-Hermitian damping per excitation: `H_eff = H − iκ Σ_j n_j`.
    pub fn kappa(&self) -> f64 {
        0.5 * (self.gamma_se + self.gamma_deph)
    }
}

/// Closed-system evolution from `initial` with default settings.
pub fn evolve_unitary(
    graph: &UdGraph,
    schedule: &PulseSchedule,
    initial: &StateVector,
) -> Result<StateVector> {
    Simulator::new(graph, SimulatorConfig::default())?.evolve_unitary(schedule, initial)
}

/// One quantum-jump trajectory from `|00…0⟩` with default settings.
pub fn evolve_trajectory(
    graph: &UdGraph,
    schedule: &PulseSchedule,
    noise: &NoiseModel,
    seed: u64,
) -> Result<Trajectory> {
    Simulator::new(graph, SimulatorConfig::default())?.evolve_trajectory(schedule, noise, seed)
}

/// Lindblad evolution from `initial` with default settings.
pub fn evolve_lindblad(
    graph: &UdGraph,
    schedule: &PulseSchedule,
    noise: &NoiseModel,
    initial: &DensityMatrix,
) -> Result<DensityMatrix> {
    Simulator::new(graph, SimulatorConfig::default())?.evolve_lindblad(schedule, noise, initial)
}
