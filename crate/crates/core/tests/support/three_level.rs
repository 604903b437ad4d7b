//! Direct single-atom Lindblad integration of the `g–e–r` ladder, used only
//! as a reference for the effective two-level model.

use rydvqa_core::reduction::ThreeLevelParams;
use rydvqa_core::C64;

type M3 = [[C64; 3]; 3];

fn zero() -> M3 {
    [[C64::new(0.0, 0.0); 3]; 3]
}

fn rhs(h: &M3, gamma: f64, rho: &M3) -> M3 {
    let i = C64::new(0.0, 1.0);
    let mut out = zero();
    for a in 0..3 {
        for b in 0..3 {
            let mut c = C64::new(0.0, 0.0);
            for k in 0..3 {
                c += h[a][k] * rho[k][b] - rho[a][k] * h[k][b];
            }
            out[a][b] = -i * c;
        }
    }
    // L = √Γ |g⟩⟨e|
    out[0][0] += gamma * rho[1][1];
    for a in 0..3 {
        for b in 0..3 {
            let w = (a == 1) as u8 as f64 + (b == 1) as u8 as f64;
            out[a][b] -= 0.5 * gamma * w * rho[a][b];
        }
    }
    out
}

fn axpy(x: &M3, s: f64, y: &M3) -> M3 {
    let mut out = *x;
    for a in 0..3 {
        for b in 0..3 {
            out[a][b] += y[a][b] * s;
        }
    }
    out
}

/// `(P_g, P_e, P_r)` at each of `times` (ascending), starting from `|g⟩`.
/// Fixed-step RK4 with `dt`.
pub fn populations(p: &ThreeLevelParams, times: &[f64], dt: f64) -> Vec<[f64; 3]> {
    let mut h = zero();
    h[0][1] = C64::new(p.rabi_r / 2.0, 0.0);
    h[1][0] = h[0][1];
    h[1][2] = C64::new(p.rabi_b / 2.0, 0.0);
    h[2][1] = h[1][2];
    h[1][1] = C64::new(-p.detuning_single, 0.0);
    h[2][2] = C64::new(-p.detuning_two_photon, 0.0);
    let g = p.gamma_eg;

    let mut rho = zero();
    rho[0][0] = C64::new(1.0, 0.0);
    let mut t = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &target in times {
        while t < target {
            let step = dt.min(target - t);
            let k1 = rhs(&h, g, &rho);
            let k2 = rhs(&h, g, &axpy(&rho, step / 2.0, &k1));
            let k3 = rhs(&h, g, &axpy(&rho, step / 2.0, &k2));
            let k4 = rhs(&h, g, &axpy(&rho, step, &k3));
            for a in 0..3 {
                for b in 0..3 {
                    rho[a][b] +=
                        (k1[a][b] + 2.0 * k2[a][b] + 2.0 * k3[a][b] + k4[a][b]) * (step / 6.0);
                }
            }
            t += step;
        }
        out.push([rho[0][0].re, rho[1][1].re, rho[2][2].re]);
    }
    out
}
