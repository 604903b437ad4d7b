//! Objective estimators over a measured distribution: mean energy and the
//! conditional value at risk `CVaR_m`, the mean over the lowest `m%` of the
//! probability mass.

use alloc::vec::Vec;

use crate::dynamics::{sample_outcomes, NORMALIZATION_TOLERANCE};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum ObjectiveKind {
    MeanEnergy,
    /// `percent` is `m ∈ (0, 100]`.
    Cvar {
        percent: f64,
    },
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "estimator", rename_all = "snake_case"))]
pub enum Estimator {
    /// Use the full distribution.
    #[default]
    Exact,
    /// Draw `shots` outcomes first. The same `seed` is used at every
    /// evaluation, so an optimizer sees a deterministic landscape.
    Sampled { shots: usize, seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ObjectiveSpec {
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub kind: ObjectiveKind,
    #[cfg_attr(feature = "serde", serde(flatten))]
    pub estimator: Estimator,
}

impl Default for ObjectiveSpec {
    fn default() -> Self {
        Self::mean()
    }
}

impl ObjectiveSpec {
    pub fn mean() -> Self {
        Self {
            kind: ObjectiveKind::MeanEnergy,
            estimator: Estimator::Exact,
        }
    }

    pub fn cvar(percent: f64) -> Result<Self> {
        let spec = Self {
            kind: ObjectiveKind::Cvar { percent },
            estimator: Estimator::Exact,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn sampled(mut self, shots: usize, seed: u64) -> Result<Self> {
        self.estimator = Estimator::Sampled { shots, seed };
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if let ObjectiveKind::Cvar { percent } = self.kind {
            if !(percent > 0.0 && percent <= 100.0) {
                return Err(Error::InvalidArgument(alloc::format!(
                    "CVaR fraction must lie in (0, 100], got {percent}"
                )));
            }
        }
        if let Estimator::Sampled { shots: 0, .. } = self.estimator {
            return Err(Error::invalid("sampled estimator needs at least one shot"));
        }
        Ok(())
    }
}

fn check(distribution: &[f64], costs: &[f64]) -> Result<()> {
    if distribution.len() != costs.len() {
        return Err(Error::invalid(
            "distribution and cost table differ in length",
        ));
    }
    let total: f64 = distribution.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::InvalidState(alloc::format!(
            "probabilities sum to {total}, not 1"
        )));
    }
    Ok(())
}

/// `Σ_z p(z) C(z)`.
pub fn mean_energy(distribution: &[f64], costs: &[f64]) -> Result<f64> {
    check(distribution, costs)?;
    Ok(distribution.iter().zip(costs).map(|(p, c)| p * c).sum())
}

/// CVaR with a fractional share of the boundary state.
pub fn cvar(distribution: &[f64], costs: &[f64], percent: f64) -> Result<f64> {
    ObjectiveSpec::cvar(percent)?;
    if percent == 100.0 {
        return mean_energy(distribution, costs);
    }
    check(distribution, costs)?;
    let alpha = percent / 100.0;
    let mut order: Vec<usize> = (0..costs.len()).collect();
    order.sort_by(|&a, &b| costs[a].total_cmp(&costs[b]));
    let mut mass = 0.0;
    let mut acc = 0.0;
    for z in order {
        let take = distribution[z].min(alpha - mass);
        if take <= 0.0 {
            break;
        }
        acc += take * costs[z];
        mass += take;
    }
    Ok(acc / alpha)
}

/// Statistic of a set of drawn energies; CVaR averages the lowest
/// `⌈n·m/100⌉` draws.
pub fn sample_statistic(energies: &mut [f64], kind: ObjectiveKind) -> Result<f64> {
    if energies.is_empty() {
        return Err(Error::invalid("no samples"));
    }
    let n = energies.len();
    match kind {
        ObjectiveKind::MeanEnergy => Ok(energies.iter().sum::<f64>() / n as f64),
        ObjectiveKind::Cvar { percent } => {
            ObjectiveSpec::cvar(percent)?;
            energies.sort_by(f64::total_cmp);
            let k = (libm::ceil(n as f64 * percent / 100.0) as usize).clamp(1, n);
            Ok(energies[..k].iter().sum::<f64>() / k as f64)
        }
    }
}

/// Score a measurement distribution.
pub fn evaluate_objective(
    distribution: &[f64],
    costs: &[f64],
    spec: &ObjectiveSpec,
) -> Result<f64> {
    spec.validate()?;
    match spec.estimator {
        Estimator::Exact => match spec.kind {
            ObjectiveKind::MeanEnergy => mean_energy(distribution, costs),
            ObjectiveKind::Cvar { percent } => cvar(distribution, costs, percent),
        },
        Estimator::Sampled { shots, seed } => {
            check(distribution, costs)?;
            let mut energies: Vec<f64> = sample_outcomes(distribution, shots, seed)?
                .into_iter()
                .map(|z| costs[z])
                .collect();
            sample_statistic(&mut energies, spec.kind)
        }
    }
}
