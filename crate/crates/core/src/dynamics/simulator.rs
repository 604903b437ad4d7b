use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::state::StateVector;
use super::{PulseSchedule, StageKind};
use crate::error::{Error, Result};
use crate::graph::UdGraph;
use crate::hamiltonian::{DriveParams, HamiltonianTerms, MAX_DENSE_ATOMS};
use crate::ode::DormandPrince;
use crate::{C64, DEFAULT_C6};

/// How stages with a transverse drive are propagated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Propagation {
    /// Exact exponential from a one-off eigendecomposition of the mixer,
    /// Strang-split against the dissipators when noise is present.
    #[default]
    Spectral,
    /// Matrix-free Dormand–Prince integration of the full right-hand side.
    RungeKutta,
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SimulatorConfig {
    pub c6: f64,
    pub propagation: Propagation,
    /// Relative tolerance of the Runge–Kutta route for pure states.
    pub pure_rtol: f64,
    /// Relative tolerance of the Runge–Kutta route for density matrices.
    pub lindblad_rtol: f64,
    /// Local error target of one split step (step doubling).
    pub split_tolerance: f64,
    /// Jump times are bisected to this fraction of the enclosing step.
    pub jump_time_rtol: f64,
    pub max_density_atoms: usize,
}

impl Default for SimulatorConfig {
    fn default() -> Self {
        Self {
            c6: DEFAULT_C6,
            propagation: Propagation::Spectral,
            pure_rtol: 1e-9,
            lindblad_rtol: 1e-8,
            split_tolerance: 1e-8,
            jump_time_rtol: 1e-6,
            max_density_atoms: 10,
        }
    }
}

impl SimulatorConfig {
    pub(crate) fn pure_integrator(&self) -> DormandPrince {
        DormandPrince::new(self.pure_rtol, self.pure_rtol * 1e-3)
    }

    pub(crate) fn lindblad_integrator(&self) -> DormandPrince {
        DormandPrince::new(self.lindblad_rtol, self.lindblad_rtol * 1e-3)
    }
}

/// Eigendecomposition `H = V diag(E) Vᵀ` of a real symmetric stage.
#[derive(Clone, Debug)]
pub(crate) struct Spectrum {
    pub energies: Vec<f64>,
    pub vectors: DMatrix<f64>,
    vectors_t: DMatrix<f64>,
}

impl Spectrum {
    fn new(terms: &HamiltonianTerms) -> Result<Self> {
        let eig = SymmetricEigen::new(terms.dense()?);
        Ok(Self {
            energies: eig.eigenvalues.iter().copied().collect(),
            vectors_t: eig.eigenvectors.transpose(),
            vectors: eig.eigenvectors,
        })
    }

    /// `ψ ← exp(−iHt) ψ`.
    pub fn propagate(&self, psi: &mut [C64], t: f64) {
        let d = psi.len();
        let re = DVector::from_iterator(d, psi.iter().map(|a| a.re));
        let im = DVector::from_iterator(d, psi.iter().map(|a| a.im));
        let mut a = DVector::zeros(d);
        let mut b = DVector::zeros(d);
        a.gemv_tr(1.0, &self.vectors, &re, 0.0);
        b.gemv_tr(1.0, &self.vectors, &im, 0.0);
        for k in 0..d {
            let (s, c) = libm::sincos(-self.energies[k] * t);
            let (x, y) = (a[k], b[k]);
            a[k] = c * x - s * y;
            b[k] = s * x + c * y;
        }
        let mut re = re;
        let mut im = im;
        re.gemv(1.0, &self.vectors, &a, 0.0);
        im.gemv(1.0, &self.vectors, &b, 0.0);
        for (k, p) in psi.iter_mut().enumerate() {
            *p = C64::new(re[k], im[k]);
        }
    }

    /// `ρ ← exp(−iHt) ρ exp(iHt)`, with `ρ` split into real and imaginary
    /// parts.
    pub fn conjugate(&self, re: &mut DMatrix<f64>, im: &mut DMatrix<f64>, t: f64) {
        let d = re.nrows();
        let v = &self.vectors;
        let mut tmp = DMatrix::<f64>::zeros(d, d);
        let vt = &self.vectors_t;
        for part in [&mut *re, &mut *im] {
            tmp.gemm(1.0, vt, part, 0.0);
            part.gemm(1.0, &tmp, v, 0.0);
        }
        let phases: Vec<(f64, f64)> = self.energies.iter().map(|e| libm::sincos(-e * t)).collect();
        for b in 0..d {
            let (sb, cb) = phases[b];
            for a in 0..d {
                let (sa, ca) = phases[a];
                // e^{−i(E_a − E_b)t} = (ca + i sa)(cb − i sb)
                let c = ca * cb + sa * sb;
                let s = sa * cb - ca * sb;
                let (x, y) = (re[(a, b)], im[(a, b)]);
                re[(a, b)] = c * x - s * y;
                im[(a, b)] = s * x + c * y;
            }
        }
        for part in [&mut *re, &mut *im] {
            tmp.gemm(1.0, v, part, 0.0);
            part.gemm(1.0, &tmp, vt, 0.0);
        }
    }
}

/// Mixer and cost Hamiltonians of one graph, ready to propagate states.
///
/// Construction diagonalizes the mixer once (spectral route, `N ≤ 12`);
/// reuse one simulator for every evaluation on the same graph.
#[derive(Clone, Debug)]
pub struct Simulator {
    config: SimulatorConfig,
    mixer: HamiltonianTerms,
    cost: HamiltonianTerms,
    spectrum: Option<Spectrum>,
    populations: Vec<u32>,
}

impl Simulator {
    pub fn new(graph: &UdGraph, config: SimulatorConfig) -> Result<Self> {
        let mixer = HamiltonianTerms::new(graph, DriveParams::mixer(config.c6))?;
        let cost = HamiltonianTerms::new(graph, DriveParams::cost(config.c6))?;
        if !(config.split_tolerance > 0.0) || !(config.jump_time_rtol > 0.0) {
            return Err(Error::invalid("simulator tolerances must be positive"));
        }
        let spectrum = match config.propagation {
            Propagation::Spectral if graph.n_atoms() <= MAX_DENSE_ATOMS => {
                Some(Spectrum::new(&mixer)?)
            }
            _ => None,
        };
        let populations = (0..mixer.dim()).map(|z| (z as u64).count_ones()).collect();
        Ok(Self {
            config,
            mixer,
            cost,
            spectrum,
            populations,
        })
    }

    pub fn config(&self) -> &SimulatorConfig {
        &self.config
    }

    pub fn n_atoms(&self) -> usize {
        self.mixer.n_atoms()
    }

    pub fn dim(&self) -> usize {
        self.mixer.dim()
    }

    pub fn hamiltonian(&self, kind: StageKind) -> &HamiltonianTerms {
        match kind {
            StageKind::Mixer => &self.mixer,
            StageKind::Cost => &self.cost,
        }
    }

    /// Propagation actually used for driven stages (the spectral route
    /// falls back to Runge–Kutta above the dense-matrix cap).
    pub fn propagation(&self) -> Propagation {
        if self.spectrum.is_some() {
            Propagation::Spectral
        } else {
            Propagation::RungeKutta
        }
    }

    pub(crate) fn spectrum(&self) -> Option<&Spectrum> {
        self.spectrum.as_ref()
    }

    pub(crate) fn populations(&self) -> &[u32] {
        &self.populations
    }

    pub(crate) fn check_state(&self, state: &StateVector) -> Result<()> {
        if state.n_atoms() != self.n_atoms() {
            return Err(Error::invalid("state and graph have different atom counts"));
        }
        Ok(())
    }

    /// Closed-system evolution `Π_k exp(−i H_k T_k)` applied to `initial`.
    pub fn evolve_unitary(
        &self,
        schedule: &PulseSchedule,
        initial: &StateVector,
    ) -> Result<StateVector> {
        self.check_state(initial)?;
        let mut state = initial.clone();
        for (kind, t) in schedule.stages() {
            self.propagate_unitary(kind, state.amplitudes_mut(), t)?;
        }
        Ok(state)
    }

    /// `ψ ← exp(−i H_kind t) ψ` for one stage.
    pub(crate) fn propagate_unitary(&self, kind: StageKind, psi: &mut [C64], t: f64) -> Result<()> {
        if t == 0.0 {
            return Ok(());
        }
        let terms = self.hamiltonian(kind);
        if terms.is_diagonal() {
            for (a, &e) in psi.iter_mut().zip(terms.diagonal()) {
                *a *= C64::from_polar(1.0, -e * t);
            }
            return Ok(());
        }
        match &self.spectrum {
            Some(sp) if kind == StageKind::Mixer => sp.propagate(psi, t),
            _ => {
                let minus_i = C64::new(0.0, -1.0);
                self.config.pure_integrator().integrate(
                    |_, y, dy| {
                        terms.apply(y, dy);
                        dy.iter_mut().for_each(|v| *v *= minus_i);
                    },
                    0.0,
                    t,
                    psi,
                )?;
            }
        }
        Ok(())
    }
}
