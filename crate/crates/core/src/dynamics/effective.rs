//! Eigendecomposition of the non-Hermitian mixer `H_eff = H − iκ Σ_j n_j`.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, Schur};

use crate::hamiltonian::HamiltonianTerms;
use crate::C64;

/// `H_eff = W diag(λ) W⁻¹`, so the no-jump propagator over any time `s` is
/// `W e^{−iλs} W⁻¹`.
#[derive(Clone, Debug)]
pub(crate) struct EffectiveSpectrum {
    values: Vec<C64>,
    vectors: DMatrix<C64>,
    inverse: DMatrix<C64>,
}

impl EffectiveSpectrum {
    /// `None` when the decomposition is not trustworthy (defective or badly
    /// conditioned eigenbasis); callers then integrate directly.
    pub fn new(terms: &HamiltonianTerms, kappa: f64, populations: &[u32]) -> Option<Self> {
        let h = terms.dense().ok()?;
        let d = h.nrows();
        let damping = |i: usize| -kappa * populations[i] as f64;
        let m = DMatrix::from_fn(d, d, |i, j| {
            C64::new(h[(i, j)], if i == j { damping(i) } else { 0.0 })
        });
        let scale = m.norm().max(f64::MIN_POSITIVE);
        let (q, t) = Schur::try_new(m, f64::EPSILON, 100_000)?.unpack();
        let values: Vec<C64> = (0..d).map(|k| t[(k, k)]).collect();

        // Eigenvectors of the triangular factor by back substitution.
        let small = f64::EPSILON * scale;
        let mut x = DMatrix::<C64>::zeros(d, d);
        for k in 0..d {
            x[(k, k)] = C64::new(1.0, 0.0);
            for i in (0..k).rev() {
                let mut acc = C64::new(0.0, 0.0);
                for j in (i + 1)..=k {
                    acc += t[(i, j)] * x[(j, k)];
                }
                let mut den = t[(i, i)] - values[k];
                if den.norm() < small {
                    den = C64::new(small, 0.0);
                }
                x[(i, k)] = -acc / den;
            }
        }
        let mut vectors = q * x;
        for mut col in vectors.column_iter_mut() {
            let n = col.norm();
            col /= C64::new(n, 0.0);
        }

        let mut image = alloc::vec![C64::new(0.0, 0.0); d];
        let mut residual = 0.0f64;
        for (k, col) in vectors.column_iter().enumerate() {
            terms.apply(col.as_slice(), &mut image);
            for (i, out) in image.iter().enumerate() {
                let r = out + col[i] * C64::new(0.0, damping(i)) - col[i] * values[k];
                residual = residual.max(r.norm());
            }
        }
        if residual > 1e-9 * scale.max(1.0) {
            return None;
        }
        let inverse = vectors.clone().try_inverse()?;
        let condition = vectors.norm() * inverse.norm() / d as f64;
        if !(condition < 1e6) {
            return None;
        }
        Some(Self {
            values,
            vectors,
            inverse,
        })
    }

    /// Coordinates `W⁻¹ψ` of a state in the eigenbasis.
    pub fn coordinates(&self, psi: &[C64]) -> DVector<C64> {
        &self.inverse * DVector::from_column_slice(psi)
    }

    /// `W e^{−iλs} c`.
    pub fn state_at(&self, coordinates: &DVector<C64>, s: f64) -> Vec<C64> {
        let phased = DVector::from_iterator(
            coordinates.len(),
            coordinates
                .iter()
                .zip(&self.values)
                .map(|(c, l)| c * (C64::new(0.0, -s) * l).exp()),
        );
        (&self.vectors * phased).as_slice().to_vec()
    }
}
