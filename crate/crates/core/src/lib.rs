//! Simulation core for variational Maximum Independent Set solving on
//! Rydberg atom arrays.
//!
//! The crate is `no_std` (with `alloc`). Enabling the default `std` feature
//! only switches nalgebra to its std build so dense products go through an
//! optimized GEMM kernel; results are otherwise identical.
//!
//! # Units
//!
//! Everything is dimensionless:
//!
//! * lengths are measured in units of the blockade radius `r_b`, so the
//!   unit-disk rule reads `r_ij < 1`;
//! * energies are measured in units of `ħΩ₀` with `ħ = 1` and `Ω₀ = Δ₀ = 1`;
//! * times are measured in units of `1/Ω₀`.
//!
//! # Basis convention
//!
//! A computational basis state over `N` atoms is the integer
//! `z = Σ_j z_j 2^j`: atom `j` lives on bit `j`, atom 0 on the least
//! significant bit. `z_j = 1` means atom `j` is in the Rydberg state.
//! State vectors and density matrices are indexed by this integer.

#![cfg_attr(not(any(feature = "std", test)), no_std)]

extern crate alloc;

pub mod dynamics;
pub mod error;
pub mod graph;
pub mod hamiltonian;
pub mod ode;
pub mod reduction;
pub mod rng;
pub mod variational;

pub use error::{Error, Result};

/// Complex amplitude type used throughout the crate.
pub type C64 = num_complex::Complex64;

/// Mixer Rabi frequency `Ω₀` (the energy unit).
pub const OMEGA_0: f64 = 1.0;

/// Cost-stage detuning `Δ₀`; chosen equal to `Ω₀`.
pub const DELTA_0: f64 = 1.0;

/// Blockade radius `r_b` (the length unit).
pub const BLOCKADE_RADIUS: f64 = 1.0;

/// Default van der Waals coefficient `C₆ = √5 ħΩ₀ r_b⁶`.
///
/// This is the value for which the blockade radius at `(Ω₀, Δ₀)` is exactly
/// one length unit, so the generated unit-disk graph and the dynamical
/// blockade agree.
pub const DEFAULT_C6: f64 = 2.236_067_977_499_79;
