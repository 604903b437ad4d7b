//! Rydberg Ising Hamiltonian
//! `H = Ω Σ_j σ_j^x − Δ Σ_j n_j + Σ_{i<j} C₆/r_ij⁶ n_i n_j`
//! and the classical objective `C(z) = −Δ₀ Σ_j z_j + U Σ_⟨i,j⟩ z_i z_j`.
//!
//! The Hamiltonian is stored for matrix-free application: a real diagonal
//! `D(z)` plus the uniform transverse amplitude `Ω` connecting `z` to every
//! `z ⊕ e_j`.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::{count_occupied_edges, BasisState, UdGraph};
use crate::{C64, DEFAULT_C6, DELTA_0, OMEGA_0};

/// Largest atom count for which a `2^N` diagonal is built.
pub const MAX_STATE_ATOMS: usize = 22;

/// Largest atom count for which a dense `2^N × 2^N` matrix is built.
pub const MAX_DENSE_ATOMS: usize = 12;

/// Laser drive of one circuit stage.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DriveParams {
    pub rabi: f64,
    pub detuning: f64,
    pub c6: f64,
}

impl DriveParams {
    pub fn new(rabi: f64, detuning: f64, c6: f64) -> Result<Self> {
        for (name, v) in [("rabi", rabi), ("detuning", detuning), ("c6", c6)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(alloc::format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        Ok(Self { rabi, detuning, c6 })
    }

    /// Mixer drive `(Ω₀, 0, C₆)`.
    pub fn mixer(c6: f64) -> Self {
        Self {
            rabi: OMEGA_0,
            detuning: 0.0,
            c6,
        }
    }

    /// Cost drive `(0, Δ₀, C₆)`.
    pub fn cost(c6: f64) -> Self {
        Self {
            rabi: 0.0,
            detuning: DELTA_0,
            c6,
        }
    }
}

/// Blockade radius `[C₆ / √((2Ω)² + Δ²)]^{1/6}`.
pub fn blockade_radius(rabi: f64, detuning: f64, c6: f64) -> Result<f64> {
    let drive = DriveParams::new(rabi, detuning, c6)?;
    let scale = libm::hypot(2.0 * drive.rabi, drive.detuning);
    if scale == 0.0 {
        return Err(Error::singular("blockade radius diverges for Ω = Δ = 0"));
    }
    Ok(libm::pow(drive.c6 / scale, 1.0 / 6.0))
}

/// Hamiltonian of one stage, laid out for matrix-free application.
#[derive(Clone, Debug)]
pub struct HamiltonianTerms {
    n_atoms: usize,
    drive: DriveParams,
    couplings: Vec<f64>,
    diagonal: Vec<f64>,
}

impl HamiltonianTerms {
    pub fn new(graph: &UdGraph, drive: DriveParams) -> Result<Self> {
        let drive = DriveParams::new(drive.rabi, drive.detuning, drive.c6)?;
        let n = graph.n_atoms();
        if n > MAX_STATE_ATOMS {
            return Err(Error::limit("state-vector atoms", MAX_STATE_ATOMS, n));
        }
        let mut couplings = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let r = graph.distance(i, j);
                if r == 0.0 {
                    return Err(Error::singular(
                        "coincident atoms have infinite interaction",
                    ));
                }
                let v = drive.c6 / libm::pow(r, 6.0);
                couplings[i * n + j] = v;
                couplings[j * n + i] = v;
            }
        }

        // D(z) = D(z without its lowest atom j) − Δ + Σ_{i ∈ rest} V_ij.
        let dim = 1usize << n;
        let mut diagonal = vec![0.0; dim];
        for z in 1..dim {
            let j = z.trailing_zeros() as usize;
            let rest = z & (z - 1);
            let mut e = diagonal[rest] - drive.detuning;
            let mut bits = rest;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                e += couplings[i * n + j];
            }
            diagonal[z] = e;
        }

        Ok(Self {
            n_atoms: n,
            drive,
            couplings,
            diagonal,
        })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn drive(&self) -> DriveParams {
        self.drive
    }

    /// Coefficient of `Σ_j σ_j^x`.
    pub fn rabi(&self) -> f64 {
        self.drive.rabi
    }

    /// Diagonal energies `D(z)` indexed by basis state.
    pub fn diagonal(&self) -> &[f64] {
        &self.diagonal
    }

    /// `C₆ / r_ij⁶` (zero on the diagonal).
    pub fn coupling(&self, i: usize, j: usize) -> f64 {
        self.couplings[i * self.n_atoms + j]
    }

    /// True when the stage has no transverse drive.
    pub fn is_diagonal(&self) -> bool {
        self.drive.rabi == 0.0
    }

    /// `out = H ψ`.
    pub fn apply(&self, psi: &[C64], out: &mut [C64]) {
        debug_assert_eq!(psi.len(), self.dim());
        debug_assert_eq!(out.len(), self.dim());
        let rabi = self.drive.rabi;
        for (z, o) in out.iter_mut().enumerate() {
            let mut acc = psi[z] * self.diagonal[z];
            if rabi != 0.0 {
                let mut flip = C64::new(0.0, 0.0);
                for j in 0..self.n_atoms {
                    flip += psi[z ^ (1 << j)];
                }
                acc += flip * rabi;
            }
            *o = acc;
        }
    }

    /// Dense real symmetric matrix of the stage (`N ≤ 12`).
    pub fn dense(&self) -> Result<DMatrix<f64>> {
        if self.n_atoms > MAX_DENSE_ATOMS {
            return Err(Error::limit(
                "dense Hamiltonian atoms",
                MAX_DENSE_ATOMS,
                self.n_atoms,
            ));
        }
        let dim = self.dim();
        let mut m = DMatrix::<f64>::zeros(dim, dim);
        for z in 0..dim {
            m[(z, z)] = self.diagonal[z];
            if self.drive.rabi != 0.0 {
                for j in 0..self.n_atoms {
                    m[(z ^ (1 << j), z)] = self.drive.rabi;
                }
            }
        }
        Ok(m)
    }
}

/// Build the Hamiltonian terms for `graph` under `drive`.
pub fn build_hamiltonian(graph: &UdGraph, drive: DriveParams) -> Result<HamiltonianTerms> {
    HamiltonianTerms::new(graph, drive)
}

/// Mixer stage `(Ω₀, 0, C₆)` with the default `C₆`.
pub fn mixer(graph: &UdGraph) -> Result<HamiltonianTerms> {
    HamiltonianTerms::new(graph, DriveParams::mixer(DEFAULT_C6))
}

/// Cost stage `(0, Δ₀, C₆)` with the default `C₆`.
pub fn cost(graph: &UdGraph) -> Result<HamiltonianTerms> {
    HamiltonianTerms::new(graph, DriveParams::cost(DEFAULT_C6))
}

/// Parameters of the classical objective `C(z)`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CostSpec {
    /// Energy gained per occupied vertex (`Δ₀`).
    pub linear_bias: f64,
    /// Penalty per occupied edge (`U`).
    pub edge_penalty: f64,
}

impl CostSpec {
    /// Smallest accepted ratio `U / Δ₀`.
    pub const MIN_PENALTY_RATIO: f64 = 4.0;

    pub fn new(linear_bias: f64, edge_penalty: f64) -> Result<Self> {
        if !(linear_bias > 0.0) || !linear_bias.is_finite() || !edge_penalty.is_finite() {
            return Err(Error::invalid("linear bias must be positive and finite"));
        }
        if edge_penalty < Self::MIN_PENALTY_RATIO * linear_bias {
            return Err(Error::invalid(
                "edge penalty must be at least 4 × linear bias",
            ));
        }
        Ok(Self {
            linear_bias,
            edge_penalty,
        })
    }

    /// `C_opt = −Δ₀ · |MIS|`.
    pub fn optimum(&self, mis_size: usize) -> f64 {
        -self.linear_bias * mis_size as f64
    }
}

impl Default for CostSpec {
    fn default() -> Self {
        Self {
            linear_bias: DELTA_0,
            edge_penalty: 10.0 * DELTA_0,
        }
    }
}

/// `C(z) = −Δ₀ · |z| + U · (occupied edges)`.
pub fn classical_cost(spec: &CostSpec, graph: &UdGraph, state: &BasisState) -> Result<f64> {
    let edges = graph.occupied_edges(state)?;
    Ok(-spec.linear_bias * state.popcount() as f64 + spec.edge_penalty * edges as f64)
}

/// Which per-basis-state energy is scored.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum CostFunction {
    /// The abstract MIS objective `C(z)`.
    Abstract(CostSpec),
    /// The physical cost-stage diagonal `−Δ₀|z| + Σ C₆/r_ij⁶ z_i z_j`.
    PhysicalDiagonal { c6: f64 },
}

impl Default for CostFunction {
    fn default() -> Self {
        CostFunction::Abstract(CostSpec::default())
    }
}

impl CostFunction {
    /// Energy of every basis state, indexed by its integer encoding.
    pub fn table(&self, graph: &UdGraph) -> Result<Vec<f64>> {
        let n = graph.n_atoms();
        if n > MAX_STATE_ATOMS {
            return Err(Error::limit("state-vector atoms", MAX_STATE_ATOMS, n));
        }
        match *self {
            CostFunction::Abstract(spec) => {
                let masks = graph.neighbor_masks();
                Ok((0..1u64 << n)
                    .map(|z| {
                        -spec.linear_bias * z.count_ones() as f64
                            + spec.edge_penalty * count_occupied_edges(masks, z) as f64
                    })
                    .collect())
            }
            CostFunction::PhysicalDiagonal { c6 } => {
                Ok(HamiltonianTerms::new(graph, DriveParams::cost(c6))?.diagonal)
            }
        }
    }
}
