//! Adaptive Dormand–Prince 5(4) integrator for complex-valued systems.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::C64;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the 5th- and 4th-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Step-size control settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DormandPrince {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl DormandPrince {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self {
            rtol,
            atol,
            max_steps: 2_000_000,
        }
    }
}

impl Default for DormandPrince {
    fn default() -> Self {
        Self::new(1e-9, 1e-12)
    }
}

/// Work counters of one integration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

struct Work {
    k: [Vec<C64>; 7],
    tmp: Vec<C64>,
    y_new: Vec<C64>,
}

impl DormandPrince {
    /// Integrate `y' = f(t, y)` from `t0` to `t1` in place.
    pub fn integrate<F>(&self, mut f: F, t0: f64, t1: f64, y: &mut [C64]) -> Result<OdeStats>
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let mut stats = OdeStats::default();
        let span = t1 - t0;
        if span == 0.0 {
            return Ok(stats);
        }
        if !(span > 0.0) || !span.is_finite() {
            return Err(Error::invalid(
                "integration interval must be forward and finite",
            ));
        }
        let n = y.len();
        let zero = C64::new(0.0, 0.0);
        let mut w = Work {
            k: core::array::from_fn(|_| vec![zero; n]),
            tmp: vec![zero; n],
            y_new: vec![zero; n],
        };

        f(t0, y, &mut w.k[0]);
        stats.evaluations += 1;
        let mut h = self.initial_step(&mut f, t0, y, &mut w, span);
        stats.evaluations += 1;
        let mut t = t0;

        while t < t1 {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(Error::limit(
                    "integrator steps",
                    self.max_steps,
                    self.max_steps + 1,
                ));
            }
            let last = t + h >= t1;
            if last {
                h = t1 - t;
            }
            let err = self.step(&mut f, t, h, y, &mut w);
            stats.evaluations += 6;
            if err <= 1.0 {
                stats.accepted += 1;
                t = if last { t1 } else { t + h };
                y.copy_from_slice(&w.y_new);
                w.k.swap(0, 6);
                let fac = if err == 0.0 {
                    5.0
                } else {
                    0.9 * libm::pow(err, -0.2)
                };
                h *= fac.clamp(0.2, 5.0);
            } else {
                stats.rejected += 1;
                let fac = 0.9 * libm::pow(err, -0.2);
                h *= fac.clamp(0.1, 0.9);
                if h <= f64::EPSILON * libm::fabs(t).max(span) {
                    return Err(Error::InvalidState(alloc::string::String::from(
                        "integrator step size underflow",
                    )));
                }
            }
        }
        Ok(stats)
    }

    fn initial_step<F>(&self, f: &mut F, t0: f64, y: &[C64], w: &mut Work, span: f64) -> f64
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let scale = |v: &C64| self.atol + self.rtol * v.norm();
        let n = y.len().max(1) as f64;
        let d0 = libm::sqrt(y.iter().map(|v| sq(v.norm() / scale(v))).sum::<f64>() / n);
        let d1 = libm::sqrt(
            y.iter()
                .zip(&w.k[0])
                .map(|(v, k)| sq(k.norm() / scale(v)))
                .sum::<f64>()
                / n,
        );
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6
        } else {
            0.01 * d0 / d1
        };
        let h0 = h0.min(span);
        for i in 0..y.len() {
            w.tmp[i] = y[i] + w.k[0][i] * h0;
        }
        f(t0 + h0, &w.tmp, &mut w.k[1]);
        let d2 = libm::sqrt(
            y.iter()
                .zip(w.k[1].iter().zip(&w.k[0]))
                .map(|(v, (k1, k0))| sq((k1 - k0).norm() / scale(v)))
                .sum::<f64>()
                / n,
        ) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            libm::pow(0.01 / d1.max(d2), 0.2)
        };
        (100.0 * h0).min(h1).min(span)
    }

    /// One trial step; leaves the candidate in `w.y_new` and its derivative
    /// in `w.k[6]`, returns the scaled error norm.
    fn step<F>(&self, f: &mut F, t: f64, h: f64, y: &[C64], w: &mut Work) -> f64
    where
        F: FnMut(f64, &[C64], &mut [C64]),
    {
        let n = y.len();
        let Work { k, tmp, y_new } = w;
        let [k1, k2, k3, k4, k5, k6, k7] = k;

        for i in 0..n {
            tmp[i] = y[i] + k1[i] * (h * A21);
        }
        f(t + C2 * h, tmp, k2);
        for i in 0..n {
            tmp[i] = y[i] + (k1[i] * A31 + k2[i] * A32) * h;
        }
        f(t + C3 * h, tmp, k3);
        for i in 0..n {
            tmp[i] = y[i] + (k1[i] * A41 + k2[i] * A42 + k3[i] * A43) * h;
        }
        f(t + C4 * h, tmp, k4);
        for i in 0..n {
            tmp[i] = y[i] + (k1[i] * A51 + k2[i] * A52 + k3[i] * A53 + k4[i] * A54) * h;
        }
        f(t + C5 * h, tmp, k5);
        for i in 0..n {
            tmp[i] =
                y[i] + (k1[i] * A61 + k2[i] * A62 + k3[i] * A63 + k4[i] * A64 + k5[i] * A65) * h;
        }
        f(t + h, tmp, k6);
        for i in 0..n {
            y_new[i] =
                y[i] + (k1[i] * A71 + k3[i] * A73 + k4[i] * A74 + k5[i] * A75 + k6[i] * A76) * h;
        }
        f(t + h, y_new, k7);

        let mut acc = 0.0;
        for i in 0..n {
            let e =
                (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h;
            let sc = self.atol + self.rtol * y[i].norm().max(y_new[i].norm());
            let r = e.norm() / sc;
            acc += r * r;
        }
        libm::sqrt(acc / n.max(1) as f64)
    }
}

fn sq(x: f64) -> f64 {
    x * x
}
