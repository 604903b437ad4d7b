use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hamiltonian::MAX_STATE_ATOMS;
use crate::rng;
use crate::C64;

/// Tolerance on `Σ p = 1` when turning a state into a distribution.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-8;

/// Pure state over the `2^N` computational basis.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    n_atoms: usize,
    amplitudes: Vec<C64>,
}

impl StateVector {
    /// `|00…0⟩`.
    pub fn ground(n_atoms: usize) -> Result<Self> {
        if n_atoms > MAX_STATE_ATOMS {
            return Err(Error::limit("state-vector atoms", MAX_STATE_ATOMS, n_atoms));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); 1 << n_atoms];
        amplitudes[0] = C64::new(1.0, 0.0);
        Ok(Self {
            n_atoms,
            amplitudes,
        })
    }

    /// The basis state `|z⟩`.
    pub fn basis(n_atoms: usize, index: usize) -> Result<Self> {
        let mut s = Self::ground(n_atoms)?;
        if index >= s.amplitudes.len() {
            return Err(Error::invalid("basis index out of range"));
        }
        s.amplitudes[0] = C64::new(0.0, 0.0);
        s.amplitudes[index] = C64::new(1.0, 0.0);
        Ok(s)
    }

    pub fn from_amplitudes(n_atoms: usize, amplitudes: Vec<C64>) -> Result<Self> {
        if n_atoms > MAX_STATE_ATOMS {
            return Err(Error::limit("state-vector atoms", MAX_STATE_ATOMS, n_atoms));
        }
        if amplitudes.len() != 1 << n_atoms {
            return Err(Error::invalid("amplitude vector length must be 2^N"));
        }
        Ok(Self {
            n_atoms,
            amplitudes,
        })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amplitudes)
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = libm::sqrt(self.norm_sqr());
        if !(n > 0.0) {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        let inv = 1.0 / n;
        self.amplitudes.iter_mut().for_each(|a| *a *= inv);
        Ok(())
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Born-rule probabilities `|ψ_z|²`.
    pub fn distribution(&self) -> Result<Vec<f64>> {
        let p: Vec<f64> = self.amplitudes.iter().map(|a| a.norm_sqr()).collect();
        check_normalized(&p)?;
        Ok(p)
    }
}

/// Mixed state over the `2^N` computational basis.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_atoms: usize,
    entries: DMatrix<C64>,
}

impl DensityMatrix {
    pub fn from_pure(state: &StateVector) -> Self {
        let a = state.amplitudes();
        let d = a.len();
        Self {
            n_atoms: state.n_atoms(),
            entries: DMatrix::from_fn(d, d, |i, j| a[i] * a[j].conj()),
        }
    }

    pub fn ground(n_atoms: usize) -> Result<Self> {
        Ok(Self::from_pure(&StateVector::ground(n_atoms)?))
    }

    pub fn from_matrix(n_atoms: usize, entries: DMatrix<C64>) -> Result<Self> {
        let d = 1usize << n_atoms;
        if entries.nrows() != d || entries.ncols() != d {
            return Err(Error::invalid("density matrix must be 2^N × 2^N"));
        }
        Ok(Self { n_atoms, entries })
    }

    pub fn n_atoms(&self) -> usize {
        self.n_atoms
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut DMatrix<C64> {
        &mut self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[(row, col)]
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    /// `max |ρ − ρ†|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let d = self.dim();
        let mut worst = 0.0f64;
        for j in 0..d {
            for i in 0..=j {
                worst = worst.max((self.entries[(i, j)] - self.entries[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part (positivity spot check).
    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.entries + self.entries.adjoint()) * C64::new(0.5, 0.0);
        nalgebra::SymmetricEigen::new(herm)
            .eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    /// `Tr(ρ²)`.
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.entries[(i, i)].re).collect()
    }

    /// Diagonal of `ρ` as a probability vector.
    pub fn distribution(&self) -> Result<Vec<f64>> {
        let p = self.diagonal();
        check_normalized(&p)?;
        Ok(p)
    }
}

pub(crate) fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

fn check_normalized(p: &[f64]) -> Result<()> {
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(Error::InvalidState(alloc::format!(
            "probabilities sum to {total}, not 1"
        )));
    }
    Ok(())
}

/// Draw `shots` basis-state indices from `distribution`.
pub fn sample_outcomes(distribution: &[f64], shots: usize, seed: u64) -> Result<Vec<usize>> {
    check_normalized(distribution)?;
    let mut cdf = Vec::with_capacity(distribution.len());
    let mut acc = 0.0;
    for &p in distribution {
        acc += p.max(0.0);
        cdf.push(acc);
    }
    let mut rng = rng::seeded(seed);
    let last = distribution.len() - 1;
    Ok((0..shots)
        .map(|_| {
            let u = rng::uniform(&mut rng) * acc;
            cdf.partition_point(|&c| c <= u).min(last)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_state_is_point_mass() {
        let s = StateVector::ground(3).unwrap();
        let p = s.distribution().unwrap();
        assert_eq!(p[0], 1.0);
        assert!(p[1..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn uniform_superposition() {
        let a = vec![C64::new(0.5, 0.0); 4];
        let s = StateVector::from_amplitudes(2, a).unwrap();
        assert_eq!(s.distribution().unwrap(), vec![0.25; 4]);
        let rho = DensityMatrix::from_pure(&s);
        assert!((rho.trace().re - 1.0).abs() < 1e-15);
        assert!((rho.purity() - 1.0).abs() < 1e-14);
        assert_eq!(rho.distribution().unwrap(), vec![0.25; 4]);
    }

    #[test]
    fn unnormalized_state_is_rejected() {
        let s =
            StateVector::from_amplitudes(1, vec![C64::new(1.0, 0.0), C64::new(0.1, 0.0)]).unwrap();
        assert!(matches!(s.distribution(), Err(Error::InvalidState(_))));
        assert!(StateVector::from_amplitudes(2, vec![C64::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn sampling_follows_distribution() {
        let p = [0.1, 0.2, 0.3, 0.4];
        let shots = sample_outcomes(&p, 100_000, 17).unwrap();
        let mut counts = [0usize; 4];
        for s in &shots {
            counts[*s] += 1;
        }
        for (c, &q) in counts.iter().zip(&p) {
            let f = *c as f64 / 1e5;
            assert!((f - q).abs() < 4.0 * libm::sqrt(q * (1.0 - q) / 1e5));
        }
        assert_eq!(shots, sample_outcomes(&p, 100_000, 17).unwrap());
    }

    #[test]
    fn zero_probability_states_are_never_drawn() {
        let p = [0.0, 0.5, 0.0, 0.5];
        let shots = sample_outcomes(&p, 10_000, 1).unwrap();
        assert!(shots.iter().all(|&s| s == 1 || s == 3));
    }
}
