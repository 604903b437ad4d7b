//! Monte-Carlo wavefunction unraveling.
//!
//! Between jumps the state follows `H_eff = H − iκ Σ_j n_j` with
//! `κ = (Γ + γ)/2` and its squared norm decays. A jump happens when the norm
//! crosses a uniform draw `r`; the channel is picked with weight
//! `⟨ψ|L_k†L_k|ψ⟩` among `√Γ σ_j⁻` and `√γ n_j`.
//!
//! Each stage Hamiltonian is constant, so the no-jump evolution over a
//! segment is an explicit function of its length: phases and damping for the
//! diagonal cost stage, and `W e^{−iλs} W⁻¹` from a one-off eigendecomposition
//! of the non-Hermitian mixer. The jump time is bisected on that function.

use alloc::boxed::Box;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;

use super::effective::EffectiveSpectrum;
use super::simulator::Simulator;
use super::state::{norm_sqr, StateVector};
use super::{NoiseModel, PulseSchedule, StageKind};
use crate::error::{Error, Result};
use crate::rng;
use crate::C64;

/// Dissipative channel of a quantum jump.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Channel {
    /// `σ_j⁻`, rate `Γ`.
    Emission,
    /// `n_j`, rate `γ`.
    Dephasing,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct JumpRecord {
    pub time: f64,
    pub atom: usize,
    pub channel: Channel,
}

/// Outcome of one stochastic trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// Normalized final state.
    pub state: StateVector,
    pub jumps: Vec<JumpRecord>,
    pub seed: u64,
}

/// No-jump propagators for one graph and one noise model.
///
/// Construction decomposes the non-Hermitian mixer (seconds at `N = 10`);
/// build it once and reuse it for every trajectory and schedule on the
/// simulator it was built from.
#[derive(Clone, Debug)]
pub struct TrajectoryEngine {
    noise: NoiseModel,
    dim: usize,
    mixer: Option<EffectiveSpectrum>,
}

struct Jumper {
    rng: ChaCha8Rng,
    threshold: f64,
}

struct Walk<'a> {
    jumper: Option<Jumper>,
    jumps: Vec<JumpRecord>,
    psi: &'a mut [C64],
    /// Absolute time at the start of the current stage.
    offset: f64,
}

type Segment<'s> = Box<dyn FnMut(f64) -> Result<Vec<C64>> + 's>;

impl Simulator {
    /// Prepare trajectory sampling under `noise`.
    pub fn trajectory_engine(&self, noise: &NoiseModel) -> Result<TrajectoryEngine> {
        let mixer = if noise.is_noiseless() || self.spectrum().is_none() {
            None
        } else {
            EffectiveSpectrum::new(
                self.hamiltonian(StageKind::Mixer),
                noise.kappa(),
                self.populations(),
            )
        };
        Ok(TrajectoryEngine {
            noise: *noise,
            dim: self.dim(),
            mixer,
        })
    }

    /// One trajectory from `|00…0⟩`.
    pub fn evolve_trajectory(
        &self,
        schedule: &PulseSchedule,
        noise: &NoiseModel,
        seed: u64,
    ) -> Result<Trajectory> {
        self.trajectory_engine(noise)?.run(self, schedule, seed)
    }

    pub fn evolve_trajectory_from(
        &self,
        schedule: &PulseSchedule,
        noise: &NoiseModel,
        initial: &StateVector,
        seed: u64,
    ) -> Result<Trajectory> {
        self.trajectory_engine(noise)?
            .run_from(self, schedule, initial, seed)
    }
}

impl TrajectoryEngine {
    pub fn noise(&self) -> &NoiseModel {
        &self.noise
    }

    fn check(&self, sim: &Simulator, initial: &StateVector) -> Result<()> {
        if sim.dim() != self.dim {
            return Err(Error::invalid(
                "trajectory engine built for a different graph",
            ));
        }
        sim.check_state(initial)
    }

    pub fn run(&self, sim: &Simulator, schedule: &PulseSchedule, seed: u64) -> Result<Trajectory> {
        self.run_from(sim, schedule, &StateVector::ground(sim.n_atoms())?, seed)
    }

    pub fn run_from(
        &self,
        sim: &Simulator,
        schedule: &PulseSchedule,
        initial: &StateVector,
        seed: u64,
    ) -> Result<Trajectory> {
        self.check(sim, initial)?;
        if self.noise.is_noiseless() {
            return Ok(Trajectory {
                state: sim.evolve_unitary(schedule, initial)?,
                jumps: Vec::new(),
                seed,
            });
        }
        let mut rng = rng::seeded(seed);
        let threshold = rng::uniform(&mut rng);
        let mut state = initial.clone();
        let jumps = self.walk(
            sim,
            schedule,
            state.amplitudes_mut(),
            Some(Jumper { rng, threshold }),
        )?;
        state.normalize()?;
        Ok(Trajectory { state, jumps, seed })
    }

    /// Unnormalized no-jump evolution `exp(−i H_eff T) ψ`; its squared norm
    /// is the probability that no jump occurred.
    pub fn no_jump(
        &self,
        sim: &Simulator,
        schedule: &PulseSchedule,
        initial: &StateVector,
    ) -> Result<StateVector> {
        self.check(sim, initial)?;
        if self.noise.is_noiseless() {
            return sim.evolve_unitary(schedule, initial);
        }
        let mut state = initial.clone();
        self.walk(sim, schedule, state.amplitudes_mut(), None)?;
        Ok(state)
    }

    fn walk(
        &self,
        sim: &Simulator,
        schedule: &PulseSchedule,
        psi: &mut [C64],
        jumper: Option<Jumper>,
    ) -> Result<Vec<JumpRecord>> {
        let mut w = Walk {
            jumper,
            jumps: Vec::new(),
            psi,
            offset: 0.0,
        };
        for (kind, t) in schedule.stages() {
            if t > 0.0 {
                self.stage(sim, kind, t, &mut w)?;
            }
            w.offset += t;
        }
        Ok(w.jumps)
    }

    /// No-jump evolution of `psi` as a function of the segment length.
    fn segment<'s>(&'s self, sim: &'s Simulator, kind: StageKind, psi: &[C64]) -> Segment<'s> {
        let terms = sim.hamiltonian(kind);
        let pops = sim.populations();
        let kappa = self.noise.kappa();
        if terms.is_diagonal() {
            let start = psi.to_vec();
            let diag = terms.diagonal();
            return Box::new(move |s| {
                Ok(start
                    .iter()
                    .zip(diag)
                    .zip(pops)
                    .map(|((a, &e), &k)| a * C64::new(-kappa * k as f64 * s, -e * s).exp())
                    .collect())
            });
        }
        if let (Some(eff), StageKind::Mixer) = (&self.mixer, kind) {
            let c = eff.coordinates(psi);
            return Box::new(move |s| Ok(eff.state_at(&c, s)));
        }
        let start = psi.to_vec();
        let dp = sim.config().pure_integrator();
        Box::new(move |s| {
            let mut y = start.clone();
            dp.integrate(
                |_, y, dy| {
                    terms.apply(y, dy);
                    for ((d, v), &k) in dy.iter_mut().zip(y).zip(pops) {
                        *d = C64::new(0.0, -1.0) * *d - v * (kappa * k as f64);
                    }
                },
                0.0,
                s,
                &mut y,
            )?;
            Ok(y)
        })
    }

    fn stage(
        &self,
        sim: &Simulator,
        kind: StageKind,
        duration: f64,
        w: &mut Walk<'_>,
    ) -> Result<()> {
        let rtol = sim.config().jump_time_rtol;
        let mut done = 0.0;
        loop {
            let remaining = duration - done;
            let threshold = w.jumper.as_ref().map_or(0.0, |j| j.threshold);
            let mut advance = self.segment(sim, kind, w.psi);
            let end = advance(remaining)?;
            if norm_sqr(&end) >= threshold {
                w.psi.copy_from_slice(&end);
                return Ok(());
            }
            let (mut lo, mut hi) = (0.0, remaining);
            let mut at_hi = end;
            while hi - lo > rtol * remaining {
                let mid = 0.5 * (lo + hi);
                let trial = advance(mid)?;
                if norm_sqr(&trial) < threshold {
                    hi = mid;
                    at_hi = trial;
                } else {
                    lo = mid;
                }
            }
            drop(advance);
            w.psi.copy_from_slice(&at_hi);
            done += hi;
            self.jump(sim.n_atoms(), w, w.offset + done)?;
        }
    }

    /// Pick a channel, apply it, renormalize and redraw the threshold.
    fn jump(&self, n: usize, w: &mut Walk<'_>, time: f64) -> Result<()> {
        let Some(jumper) = w.jumper.as_mut() else {
            return Ok(());
        };
        let mut occupation = alloc::vec![0.0; n];
        for (z, a) in w.psi.iter().enumerate() {
            let p = a.norm_sqr();
            let mut bits = z;
            while bits != 0 {
                occupation[bits.trailing_zeros() as usize] += p;
                bits &= bits - 1;
            }
        }
        let rates = [
            (Channel::Emission, self.noise.gamma_se),
            (Channel::Dephasing, self.noise.gamma_deph),
        ];
        let total: f64 = rates.iter().map(|(_, g)| g).sum::<f64>() * occupation.iter().sum::<f64>();
        if !(total > 0.0) {
            return Err(Error::InvalidState(
                "jump requested with no active channel".into(),
            ));
        }
        let mut u = rng::uniform(&mut jumper.rng) * total;
        let mut pick = None;
        'outer: for &(channel, rate) in &rates {
            for (atom, &p) in occupation.iter().enumerate() {
                let weight = rate * p;
                if weight > 0.0 {
                    pick = Some((channel, atom));
                    if u < weight {
                        break 'outer;
                    }
                    u -= weight;
                }
            }
        }
        let (channel, atom) = pick.expect("positive total weight");
        let m = 1usize << atom;
        let zero = C64::new(0.0, 0.0);
        match channel {
            Channel::Emission => {
                for z in 0..w.psi.len() {
                    if z & m == 0 {
                        w.psi[z] = w.psi[z | m];
                        w.psi[z | m] = zero;
                    }
                }
            }
            Channel::Dephasing => {
                for (z, a) in w.psi.iter_mut().enumerate() {
                    if z & m == 0 {
                        *a = zero;
                    }
                }
            }
        }
        let norm = libm::sqrt(norm_sqr(w.psi));
        if !(norm > 0.0) {
            return Err(Error::InvalidState("jump annihilated the state".into()));
        }
        w.psi.iter_mut().for_each(|a| *a /= norm);
        w.jumps.push(JumpRecord {
            time,
            atom,
            channel,
        });
        jumper.threshold = rng::uniform(&mut jumper.rng);
        Ok(())
    }
}
