//! Nelder–Mead downhill simplex.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct NelderMeadConfig {
    pub reflection: f64,
    pub expansion: f64,
    pub contraction: f64,
    pub shrink: f64,
    /// Offset added to each coordinate of the start point to build the
    /// initial simplex.
    pub initial_step: f64,
    /// Stop once `max f − min f` over the simplex falls below this ...
    pub f_tolerance: f64,
    /// ... and every vertex lies within this distance (per coordinate) of
    /// the best one.
    pub x_tolerance: f64,
    pub max_evaluations: usize,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self {
            reflection: 1.0,
            expansion: 2.0,
            contraction: 0.5,
            shrink: 0.5,
            initial_step: 0.25,
            f_tolerance: 1e-4,
            x_tolerance: 1e-4,
            max_evaluations: 200,
        }
    }
}

impl NelderMeadConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.reflection > 0.0
            && self.expansion > 1.0
            && self.expansion > self.reflection
            && self.contraction > 0.0
            && self.contraction < 1.0
            && self.shrink > 0.0
            && self.shrink < 1.0
            && self.initial_step != 0.0
            && self.initial_step.is_finite()
            && self.f_tolerance >= 0.0
            && self.x_tolerance >= 0.0
            && self.max_evaluations >= 1;
        if ok {
            Ok(())
        } else {
            Err(Error::invalid("invalid Nelder-Mead coefficients"))
        }
    }
}

/// One objective evaluation in call order.
#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Evaluation {
    /// Simplex iteration during which the point was evaluated (0 for the
    /// initial simplex).
    pub iteration: usize,
    pub params: Vec<f64>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Minimum {
    pub params: Vec<f64>,
    pub value: f64,
    pub evaluations: Vec<Evaluation>,
    pub iterations: usize,
    pub converged: bool,
}

struct Budget<'f, F> {
    f: &'f mut F,
    log: Vec<Evaluation>,
    max: usize,
    iteration: usize,
}

impl<F: FnMut(&[f64]) -> Result<f64>> Budget<'_, F> {
    /// `None` once the budget is spent.
    fn eval(&mut self, x: &[f64]) -> Result<Option<f64>> {
        if self.log.len() >= self.max {
            return Ok(None);
        }
        let v = (self.f)(x)?;
        // NaN ranks last so the simplex moves away from it.
        let v = if v.is_nan() { f64::INFINITY } else { v };
        self.log.push(Evaluation {
            iteration: self.iteration,
            params: x.to_vec(),
            value: v,
        });
        Ok(Some(v))
    }
}

fn affine(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    // a + t (b − a)
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

/// Minimize `f` from `start`.
pub fn minimize<F>(mut f: F, start: &[f64], config: &NelderMeadConfig) -> Result<Minimum>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    config.validate()?;
    let n = start.len();
    if n == 0 {
        return Err(Error::invalid("nothing to optimize"));
    }
    let mut b = Budget {
        f: &mut f,
        log: Vec::new(),
        max: config.max_evaluations,
        iteration: 0,
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let mut converged = false;
    'run: {
        for i in 0..=n {
            let mut x = start.to_vec();
            if i > 0 {
                x[i - 1] += config.initial_step;
            }
            match b.eval(&x)? {
                Some(v) => simplex.push((x, v)),
                None => break 'run,
            }
        }
        loop {
            simplex.sort_by(|a, c| a.1.total_cmp(&c.1));
            let spread_f = simplex[n].1 - simplex[0].1;
            let spread_x = simplex[1..]
                .iter()
                .flat_map(|(x, _)| x.iter().zip(&simplex[0].0).map(|(a, c)| (a - c).abs()))
                .fold(0.0, f64::max);
            if spread_f <= config.f_tolerance && spread_x <= config.x_tolerance {
                converged = true;
                break 'run;
            }
            b.iteration += 1;

            let mut centroid = vec![0.0; n];
            for (x, _) in &simplex[..n] {
                for (c, v) in centroid.iter_mut().zip(x) {
                    *c += v / n as f64;
                }
            }
            let worst = simplex[n].clone();
            let xr = affine(&centroid, &worst.0, -config.reflection);
            let Some(fr) = b.eval(&xr)? else { break 'run };

            if fr < simplex[0].1 {
                let xe = affine(&centroid, &worst.0, -config.reflection * config.expansion);
                let Some(fe) = b.eval(&xe)? else {
                    simplex[n] = (xr, fr);
                    break 'run;
                };
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
                continue;
            }
            if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
                continue;
            }
            let (xc, outside) = if fr < worst.1 {
                (affine(&centroid, &xr, config.contraction), true)
            } else {
                (affine(&centroid, &worst.0, config.contraction), false)
            };
            let Some(fc) = b.eval(&xc)? else { break 'run };
            if (outside && fc <= fr) || (!outside && fc < worst.1) {
                simplex[n] = (xc, fc);
                continue;
            }
            let best = simplex[0].0.clone();
            for vertex in simplex.iter_mut().skip(1) {
                let x = affine(&best, &vertex.0, config.shrink);
                let Some(v) = b.eval(&x)? else { break 'run };
                *vertex = (x, v);
            }
        }
    }

    let iterations = b.iteration;
    let log = b.log;
    let best = log
        .iter()
        .min_by(|a, c| a.value.total_cmp(&c.value))
        .expect("at least one evaluation");
    Ok(Minimum {
        params: best.params.clone(),
        value: best.value,
        iterations,
        converged,
        evaluations: log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rosenbrock(x: &[f64]) -> Result<f64> {
        Ok(100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2))
    }

    #[test]
    fn quadratic_bowl() {
        let m = minimize(
            |x| Ok((x[0] - 0.3).powi(2) + 2.0 * (x[1] + 0.7).powi(2)),
            &[2.0, 2.0],
            &NelderMeadConfig::default(),
        )
        .unwrap();
        assert!(m.converged);
        assert!((m.params[0] - 0.3).abs() < 1e-3 && (m.params[1] + 0.7).abs() < 1e-3);
    }

    #[test]
    fn budget_is_respected_and_best_is_trace_minimum() {
        let cfg = NelderMeadConfig {
            max_evaluations: 37,
            ..NelderMeadConfig::default()
        };
        let m = minimize(rosenbrock, &[-1.2, 1.0], &cfg).unwrap();
        assert_eq!(m.evaluations.len(), 37);
        assert!(!m.converged);
        let min = m
            .evaluations
            .iter()
            .map(|e| e.value)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(m.value, min);
        assert!(m.value <= m.evaluations[0].value);
    }

    #[test]
    fn errors_propagate() {
        let r = minimize(
            |_| Err(Error::InvalidState("boom".into())),
            &[0.0],
            &NelderMeadConfig::default(),
        );
        assert!(r.is_err());
        assert!(minimize(rosenbrock, &[], &NelderMeadConfig::default()).is_err());
    }

    #[test]
    fn one_dimensional() {
        let m = minimize(
            |x| Ok(libm::cos(x[0])),
            &[2.0],
            &NelderMeadConfig::default(),
        )
        .unwrap();
        assert!((m.params[0] - core::f64::consts::PI).abs() < 1e-3);
    }
}
