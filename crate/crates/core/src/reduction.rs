//! Adiabatic elimination of the intermediate level of a two-photon
//! `|g⟩ → |e⟩ → |r⟩` ladder.
//!
//! Drives follow the `Ω/2` convention: the ladder Hamiltonian is
//! `(Ω_r/2)(|g⟩⟨e| + h.c.) + (Ω_b/2)(|e⟩⟨r| + h.c.) − Δ₁|e⟩⟨e| − Δ₂|r⟩⟨r|`
//! and the effective one is `(Ω/2)σ^x − Δ n`.

use crate::error::{Error, Result};

/// `|Δ₁| / max(Ω_r, Ω_b)` below which the elimination is flagged.
pub const VALIDITY_RATIO: f64 = 5.0;

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ThreeLevelParams {
    pub rabi_r: f64,
    pub rabi_b: f64,
    pub detuning_single: f64,
    pub detuning_two_photon: f64,
    pub gamma_eg: f64,
    /// Fraction of `|e⟩` decays that return to `|g⟩`. Only `1` is modelled.
    pub branching: f64,
}

impl ThreeLevelParams {
    pub fn new(
        rabi_r: f64,
        rabi_b: f64,
        detuning_single: f64,
        detuning_two_photon: f64,
        gamma_eg: f64,
    ) -> Self {
        Self {
            rabi_r,
            rabi_b,
            detuning_single,
            detuning_two_photon,
            gamma_eg,
            branching: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EffectiveTwoLevel {
    pub rabi: f64,
    pub detuning: f64,
    pub gamma_se: f64,
    /// `|Δ₁| ≥ 5 max(Ω_r, Ω_b)`.
    pub valid: bool,
}

impl EffectiveTwoLevel {
    /// Coefficient of `σ^x` in the simulator's Hamiltonian, which carries
    /// no factor of one half.
    pub fn sigma_x_amplitude(&self) -> f64 {
        self.rabi / 2.0
    }
}

pub fn effective_two_level(p: &ThreeLevelParams) -> Result<EffectiveTwoLevel> {
    let ThreeLevelParams {
        rabi_r,
        rabi_b,
        detuning_single: d1,
        detuning_two_photon: d2,
        gamma_eg,
        branching,
    } = *p;
    for v in [rabi_r, rabi_b, d1, d2, gamma_eg, branching] {
        if !v.is_finite() {
            return Err(Error::invalid("three-level parameters must be finite"));
        }
    }
    if rabi_r < 0.0 || rabi_b < 0.0 || gamma_eg < 0.0 {
        return Err(Error::invalid(
            "Rabi frequencies and Γ_eg must be non-negative",
        ));
    }
    if !(0.0..=1.0).contains(&branching) {
        return Err(Error::invalid("branching ratio must lie in [0, 1]"));
    }
    if d1 == 0.0 {
        return Err(Error::singular("single-photon detuning Δ₁ is zero"));
    }
    let (r2, b2) = (rabi_r * rabi_r, rabi_b * rabi_b);
    Ok(EffectiveTwoLevel {
        rabi: rabi_r * rabi_b / (2.0 * d1),
        // Light shifts of |g⟩ and |r⟩ are Ω_r²/4Δ₁ and Ω_b²/4Δ₁.
        detuning: d2 + (r2 - b2) / (4.0 * d1),
        gamma_se: gamma_eg * (r2 + b2) / (4.0 * d1 * d1),
        valid: d1.abs() >= VALIDITY_RATIO * rabi_r.max(rabi_b),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn symmetric_drives_cancel_the_light_shift() {
        let e = effective_two_level(&ThreeLevelParams::new(1.0, 1.0, 7.3, 0.0, 0.4)).unwrap();
        assert_eq!(e.detuning, 0.0);
        let e = effective_two_level(&ThreeLevelParams::new(2.5, 2.5, -30.0, 0.7, 0.4)).unwrap();
        assert_eq!(e.detuning, 0.7);
    }

    #[test]
    fn direct_substitution() {
        let e = effective_two_level(&ThreeLevelParams::new(1.0, 1.0, 10.0, 0.0, 1.0)).unwrap();
        assert!((e.rabi - 0.05).abs() < 1e-15);
        assert!((e.gamma_se - 0.005).abs() < 1e-15);
        assert!(e.valid);
        assert!((e.sigma_x_amplitude() - 0.025).abs() < 1e-15);

        let e = effective_two_level(&ThreeLevelParams::new(2.0, 1.0, 8.0, 0.1, 1.0)).unwrap();
        assert!((e.detuning - (0.1 + 3.0 / 32.0)).abs() < 1e-15);
    }

    #[test]
    fn validity_flag() {
        let ok = effective_two_level(&ThreeLevelParams::new(1.0, 2.0, -10.0, 0.0, 0.0)).unwrap();
        assert!(ok.valid);
        let bad = effective_two_level(&ThreeLevelParams::new(1.0, 2.0, 9.99, 0.0, 0.0)).unwrap();
        assert!(!bad.valid);
    }

    #[test]
    fn zero_detuning_is_singular() {
        let err = effective_two_level(&ThreeLevelParams::new(1.0, 1.0, 0.0, 0.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::SingularInput(_)));
        let mut p = ThreeLevelParams::new(1.0, 1.0, 1.0, 0.0, 1.0);
        p.branching = 1.5;
        assert!(effective_two_level(&p).is_err());
        assert!(effective_two_level(&ThreeLevelParams::new(f64::NAN, 1.0, 1.0, 0.0, 1.0)).is_err());
    }

    proptest! {
        #[test]
        fn scaling(r in 0.1f64..5.0, b in 0.1f64..5.0, d1 in 1.0f64..50.0, g in 0.0f64..3.0, l in 0.2f64..5.0) {
            let a = effective_two_level(&ThreeLevelParams::new(r, b, d1, 0.0, g)).unwrap();
            let s = effective_two_level(&ThreeLevelParams::new(l * r, l * b, l * l * d1, 0.0, g)).unwrap();
            prop_assert!((s.rabi - a.rabi).abs() <= 1e-12 * a.rabi);
            prop_assert!((s.gamma_se - a.gamma_se / (l * l)).abs() <= 1e-12 * a.gamma_se.max(1e-300));
        }

        #[test]
        fn swap_flips_light_shift(r in 0.0f64..5.0, b in 0.0f64..5.0, d1 in -50.0f64..50.0, d2 in -1.0f64..1.0) {
            prop_assume!(d1.abs() > 1e-3);
            let a = effective_two_level(&ThreeLevelParams::new(r, b, d1, d2, 1.0)).unwrap();
            let s = effective_two_level(&ThreeLevelParams::new(b, r, d1, d2, 1.0)).unwrap();
            prop_assert!(((a.detuning - d2) + (s.detuning - d2)).abs() < 1e-12);
            prop_assert_eq!(a.gamma_se, s.gamma_se);
            prop_assert!(a.gamma_se >= 0.0);
        }

        #[test]
        fn decay_vanishes_far_detuned(r in 0.1f64..5.0, b in 0.1f64..5.0) {
            let near = effective_two_level(&ThreeLevelParams::new(r, b, 10.0, 0.0, 1.0)).unwrap();
            let far = effective_two_level(&ThreeLevelParams::new(r, b, 1e4, 0.0, 1.0)).unwrap();
            prop_assert!(far.gamma_se < near.gamma_se * 1e-5);
        }
    }
}
