//! The classical half of the variational loop.

mod nelder_mead;
mod objective;
mod problem;

use alloc::vec::Vec;

pub use nelder_mead::{minimize, Evaluation, Minimum, NelderMeadConfig};
pub use objective::{
    cvar, evaluate_objective, mean_energy, sample_statistic, Estimator, ObjectiveKind,
    ObjectiveSpec,
};
pub use problem::{
    approximation_ratio, optimize, param_distance, EnergyStatistics, Engine, OptimizationRecord,
    Score, TraceEntry, VariationalProblem,
};

use crate::rng;

/// Start point with every duration uniform in `[0, π)`.
pub fn uniform_start(len: usize, seed: u64) -> Vec<f64> {
    let mut r = rng::seeded(seed);
    (0..len)
        .map(|_| core::f64::consts::PI * rng::uniform(&mut r))
        .collect()
}

#[cfg(test)]
mod tests;
