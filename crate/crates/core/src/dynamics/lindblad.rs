//! Density-matrix propagation.
//!
//! The single-atom dissipators `Γ D[σ_j⁻] + γ D[n_j]` act on distinct atoms,
//! commute with each other and have a closed-form solution; the spectral
//! route Strang-splits them against the exact unitary of each stage and
//! accepts the Richardson-extrapolated step-doubling result.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::simulator::Simulator;
use super::state::DensityMatrix;
use super::{NoiseModel, PulseSchedule, StageKind};
use crate::error::{Error, Result};
use crate::C64;

/// Real and imaginary parts of `ρ`.
#[derive(Clone)]
struct Parts {
    re: DMatrix<f64>,
    im: DMatrix<f64>,
}

impl Parts {
    fn from(rho: &DMatrix<C64>) -> Self {
        Self {
            re: rho.map(|c| c.re),
            im: rho.map(|c| c.im),
        }
    }

    fn into_complex(self) -> DMatrix<C64> {
        self.re.zip_map(&self.im, C64::new)
    }

    fn distance(&self, other: &Parts) -> f64 {
        libm::sqrt((&self.re - &other.re).norm_squared() + (&self.im - &other.im).norm_squared())
    }

    fn hermitize(&mut self) {
        let d = self.re.nrows();
        for y in 0..d {
            for x in 0..y {
                let r = 0.5 * (self.re[(x, y)] + self.re[(y, x)]);
                self.re[(x, y)] = r;
                self.re[(y, x)] = r;
                let i = 0.5 * (self.im[(x, y)] - self.im[(y, x)]);
                self.im[(x, y)] = i;
                self.im[(y, x)] = -i;
            }
            self.im[(y, y)] = 0.0;
        }
    }
}

/// Exact solution of the dissipators over a time `s`.
fn dissipate(m: &mut DMatrix<f64>, n_atoms: usize, noise: &NoiseModel, s: f64) {
    let decay = libm::exp(-noise.gamma_se * s);
    let coherence = libm::exp(-noise.kappa() * s);
    let d = m.nrows();
    for j in 0..n_atoms {
        let bit = 1usize << j;
        for y in 0..d {
            let by = y & bit != 0;
            for x in 0..d {
                let bx = x & bit != 0;
                if bx && by {
                    let v = m[(x, y)];
                    m[(x, y)] = v * decay;
                    m[(x ^ bit, y ^ bit)] += v * (1.0 - decay);
                } else if bx != by {
                    m[(x, y)] *= coherence;
                }
            }
        }
    }
}

impl Simulator {
    /// Integrate the master equation through `schedule` starting from
    /// `initial`.
    pub fn evolve_lindblad(
        &self,
        schedule: &PulseSchedule,
        noise: &NoiseModel,
        initial: &DensityMatrix,
    ) -> Result<DensityMatrix> {
        let cap = self.config().max_density_atoms;
        if self.n_atoms() > cap {
            return Err(Error::limit("density-matrix atoms", cap, self.n_atoms()));
        }
        if initial.n_atoms() != self.n_atoms() {
            return Err(Error::invalid("state and graph have different atom counts"));
        }
        let mut rho = initial.clone();
        for (kind, t) in schedule.stages() {
            if t == 0.0 {
                continue;
            }
            if self.spectrum().is_some() {
                let mut parts = Parts::from(rho.matrix());
                if noise.is_noiseless() {
                    self.conjugate(kind, &mut parts, t);
                } else {
                    self.split_density_stage(kind, noise, &mut parts, t)?;
                }
                *rho.matrix_mut() = parts.into_complex();
            } else {
                self.runge_kutta_lindblad(kind, noise, rho.matrix_mut(), t)?;
            }
        }
        Ok(rho)
    }

    /// `ρ ← e^{−iHt} ρ e^{iHt}` for one stage.
    fn conjugate(&self, kind: StageKind, parts: &mut Parts, t: f64) {
        let terms = self.hamiltonian(kind);
        if terms.is_diagonal() {
            let phases: Vec<(f64, f64)> = terms
                .diagonal()
                .iter()
                .map(|e| libm::sincos(-e * t))
                .collect();
            let d = phases.len();
            for y in 0..d {
                let (sy, cy) = phases[y];
                for x in 0..d {
                    let (sx, cx) = phases[x];
                    let c = cx * cy + sx * sy;
                    let s = sx * cy - cx * sy;
                    let (a, b) = (parts.re[(x, y)], parts.im[(x, y)]);
                    parts.re[(x, y)] = c * a - s * b;
                    parts.im[(x, y)] = s * a + c * b;
                }
            }
        } else {
            let sp = self.spectrum().expect("driven stage needs a spectrum here");
            sp.conjugate(&mut parts.re, &mut parts.im, t);
        }
    }

    fn strang(&self, kind: StageKind, noise: &NoiseModel, parts: &mut Parts, h: f64) {
        let n = self.n_atoms();
        dissipate(&mut parts.re, n, noise, 0.5 * h);
        dissipate(&mut parts.im, n, noise, 0.5 * h);
        self.conjugate(kind, parts, h);
        dissipate(&mut parts.re, n, noise, 0.5 * h);
        dissipate(&mut parts.im, n, noise, 0.5 * h);
    }

    fn split_density_stage(
        &self,
        kind: StageKind,
        noise: &NoiseModel,
        parts: &mut Parts,
        duration: f64,
    ) -> Result<()> {
        let tol = self.config().split_tolerance;
        let mut t = 0.0;
        let mut h = duration.min(0.25);
        while t < duration {
            let last = t + h >= duration;
            if last {
                h = duration - t;
            }
            let mut coarse = parts.clone();
            self.strang(kind, noise, &mut coarse, h);
            let mut fine = parts.clone();
            self.strang(kind, noise, &mut fine, 0.5 * h);
            self.strang(kind, noise, &mut fine, 0.5 * h);
            let err = coarse.distance(&fine) / tol;
            let factor = if err == 0.0 {
                4.0
            } else {
                (0.9 * libm::cbrt(1.0 / err)).clamp(0.2, 4.0)
            };
            if err <= 1.0 {
                // Richardson: (4 S(h/2)² − S(h)) / 3 cancels the leading error.
                parts.re = (&fine.re * 4.0 - &coarse.re) / 3.0;
                parts.im = (&fine.im * 4.0 - &coarse.im) / 3.0;
                parts.hermitize();
                t = if last { duration } else { t + h };
            } else if h < 1e-14 * duration.max(1.0) {
                return Err(Error::InvalidState("split step size underflow".into()));
            }
            h *= factor;
        }
        Ok(())
    }

    /// Matrix-free Dormand–Prince integration of the full master equation.
    fn runge_kutta_lindblad(
        &self,
        kind: StageKind,
        noise: &NoiseModel,
        rho: &mut DMatrix<C64>,
        t: f64,
    ) -> Result<()> {
        let terms = self.hamiltonian(kind);
        let n = self.n_atoms();
        let d = self.dim();
        let diag = terms.diagonal();
        let rabi = terms.rabi();
        let pops = self.populations();
        let (gamma, deph, kappa) = (noise.gamma_se, noise.gamma_deph, noise.kappa());
        let minus_i = C64::new(0.0, -1.0);
        self.config().lindblad_integrator().integrate(
            |_, r, dr| {
                for y in 0..d {
                    for x in 0..d {
                        let v = r[x + y * d];
                        let mut comm = v * (diag[x] - diag[y]);
                        if rabi != 0.0 {
                            let mut flip = C64::new(0.0, 0.0);
                            for j in 0..n {
                                let bit = 1 << j;
                                flip += r[(x ^ bit) + y * d] - r[x + (y ^ bit) * d];
                            }
                            comm += flip * rabi;
                        }
                        let mut out = minus_i * comm - v * (kappa * (pops[x] + pops[y]) as f64)
                            + v * (deph * (x & y).count_ones() as f64);
                        if gamma != 0.0 {
                            let free = !(x | y) & (d - 1);
                            let mut bits = free;
                            while bits != 0 {
                                let bit = bits & bits.wrapping_neg();
                                bits &= bits - 1;
                                out += r[(x | bit) + (y | bit) * d] * gamma;
                            }
                        }
                        dr[x + y * d] = out;
                    }
                }
            },
            0.0,
            t,
            rho.as_mut_slice(),
        )?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Propagation, SimulatorConfig, StateVector};
    use crate::graph::UdGraph;
    use crate::ode::DormandPrince;
    use alloc::vec;

    fn lone_atom() -> UdGraph {
        UdGraph::from_positions(vec![[0.5, 0.5]], 1.0).unwrap()
    }

    fn rk() -> SimulatorConfig {
        SimulatorConfig {
            propagation: Propagation::RungeKutta,
            ..SimulatorConfig::default()
        }
    }

    #[test]
    fn closed_system_limit() {
        let g = UdGraph::random(4, 2.6, 5).unwrap();
        let s = PulseSchedule::three(1.5, 1.0, 1.0).unwrap();
        let sim = Simulator::new(&g, SimulatorConfig::default()).unwrap();
        let psi = sim
            .evolve_unitary(&s, &StateVector::ground(4).unwrap())
            .unwrap();
        let rho = sim
            .evolve_lindblad(
                &s,
                &NoiseModel::noiseless(),
                &DensityMatrix::ground(4).unwrap(),
            )
            .unwrap();
        let want = DensityMatrix::from_pure(&psi);
        assert!((rho.matrix() - want.matrix()).camax() < 1e-10);
    }

    #[test]
    fn emission_and_dephasing_on_a_lone_atom() {
        let gamma = 0.3;
        let deph = 0.7;
        let t = 1.9;
        let s = PulseSchedule::new(vec![0.0, t]).unwrap();
        for cfg in [SimulatorConfig::default(), rk()] {
            let sim = Simulator::new(&lone_atom(), cfg).unwrap();
            let up = DensityMatrix::from_pure(&StateVector::basis(1, 1).unwrap());
            let rho = sim
                .evolve_lindblad(&s, &NoiseModel::emission(gamma).unwrap(), &up)
                .unwrap();
            assert!((rho.get(1, 1).re - libm::exp(-gamma * t)).abs() < 1e-9);

            let h = core::f64::consts::FRAC_1_SQRT_2;
            let plus = StateVector::from_amplitudes(1, vec![C64::new(h, 0.0); 2]).unwrap();
            let rho = sim
                .evolve_lindblad(
                    &s,
                    &NoiseModel::new(0.0, deph).unwrap(),
                    &DensityMatrix::from_pure(&plus),
                )
                .unwrap();
            assert!((rho.get(0, 1).norm() - 0.5 * libm::exp(-deph * t / 2.0)).abs() < 1e-9);
        }
    }

    /// Optical Bloch equations for `H = Ω σˣ` with decay `Γ`, written out
    /// with explicit 2×2 matrix products.
    fn bloch_oracle(rabi: f64, gamma: f64, t: f64) -> [C64; 4] {
        let mut y = [
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
        ];
        let h = [[0.0, rabi], [rabi, 0.0]];
        DormandPrince::new(1e-12, 1e-14)
            .integrate(
                |_, r, dr| {
                    let rho = [[r[0], r[1]], [r[2], r[3]]];
                    let i = C64::new(0.0, 1.0);
                    for a in 0..2 {
                        for b in 0..2 {
                            let mut v = C64::new(0.0, 0.0);
                            for c in 0..2 {
                                v -= i * (rho[c][b] * h[a][c] - rho[a][c] * h[c][b]);
                            }
                            // σ⁻ = |0⟩⟨1|, n = |1⟩⟨1|
                            if a == 0 && b == 0 {
                                v += rho[1][1] * gamma;
                            }
                            let na = (a == 1) as u8 as f64;
                            let nb = (b == 1) as u8 as f64;
                            v -= rho[a][b] * (0.5 * gamma * (na + nb));
                            dr[2 * a + b] = v;
                        }
                    }
                },
                0.0,
                t,
                &mut y,
            )
            .unwrap();
        y
    }

    #[test]
    fn damped_rabi_matches_bloch_equations() {
        let gamma = 0.35;
        for cfg in [SimulatorConfig::default(), rk()] {
            let sim = Simulator::new(&lone_atom(), cfg).unwrap();
            for &t in &[0.4, 1.3, 3.7] {
                let s = PulseSchedule::new(vec![t]).unwrap();
                let rho = sim
                    .evolve_lindblad(
                        &s,
                        &NoiseModel::emission(gamma).unwrap(),
                        &DensityMatrix::ground(1).unwrap(),
                    )
                    .unwrap();
                let want = bloch_oracle(1.0, gamma, t);
                for a in 0..2 {
                    for b in 0..2 {
                        assert!((rho.get(a, b) - want[2 * a + b]).norm() < 1e-7);
                    }
                }
            }
        }
    }

    #[test]
    fn physical_invariants() {
        let g = UdGraph::random(4, 2.6, 8).unwrap();
        let sim = Simulator::new(&g, SimulatorConfig::default()).unwrap();
        let s = PulseSchedule::three(1.5, 1.0, 1.0).unwrap();
        let rho = sim
            .evolve_lindblad(
                &s,
                &NoiseModel::new(0.2, 0.1).unwrap(),
                &DensityMatrix::ground(4).unwrap(),
            )
            .unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-8);
        assert!(rho.trace().im.abs() < 1e-12);
        assert!(rho.hermiticity_defect() <= 1e-10);
        assert!(rho.min_eigenvalue() >= -1e-8);
        assert!(rho.purity() < 1.0);
    }

    #[test]
    fn spectral_split_matches_runge_kutta() {
        let g = UdGraph::random(3, 1.0, 21).unwrap();
        let s = PulseSchedule::three(0.9, 0.6, 1.2).unwrap();
        let noise = NoiseModel::new(0.2, 0.15).unwrap();
        let init = DensityMatrix::ground(3).unwrap();
        let a = Simulator::new(&g, SimulatorConfig::default())
            .unwrap()
            .evolve_lindblad(&s, &noise, &init)
            .unwrap();
        let b = Simulator::new(&g, rk())
            .unwrap()
            .evolve_lindblad(&s, &noise, &init)
            .unwrap();
        assert!((a.matrix() - b.matrix()).camax() < 1e-6);
    }

    #[test]
    fn density_cap_is_enforced() {
        let g = UdGraph::random(5, 1.0, 0).unwrap();
        let cfg = SimulatorConfig {
            max_density_atoms: 4,
            ..SimulatorConfig::default()
        };
        let sim = Simulator::new(&g, cfg).unwrap();
        let err = sim
            .evolve_lindblad(
                &PulseSchedule::three(1.0, 1.0, 1.0).unwrap(),
                &NoiseModel::noiseless(),
                &DensityMatrix::ground(5).unwrap(),
            )
            .unwrap_err();
        assert!(matches!(err, Error::ResourceLimit { .. }));
    }
}
