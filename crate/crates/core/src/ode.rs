//! Dormand–Prince 5(4) with a caller-supplied step cap.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, max_steps: 5_000_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Stats {
    pub accepted: usize,
    pub rejected: usize,
}

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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b*, the embedded error weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const D: usize>(y: &[f64; D], h: f64, terms: &[(f64, &[f64; D])]) -> [f64; D] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..D {
            out[i] += h * c * k[i];
        }
    }
    out
}

impl Dopri5 {
    /// Integrates `y' = f(x, y)` from `x0` to `x1` (either direction).
    /// `max_step(x)` bounds the step length near `x`.
    pub fn solve<const D: usize, F, C>(
        &self,
        mut f: F,
        x0: f64,
        x1: f64,
        y0: [f64; D],
        max_step: C,
    ) -> Result<([f64; D], Stats)>
    where
        F: FnMut(f64, &[f64; D]) -> [f64; D],
        C: Fn(f64) -> f64,
    {
        let mut stats = Stats::default();
        if x0 == x1 {
            return Ok((y0, stats));
        }
        let dir = (x1 - x0).signum();
        let span = (x1 - x0).abs();
        let mut x = x0;
        let mut y = y0;
        let mut k1 = f(x, &y);
        let mut h = max_step(x).min(span).min(1e-3 * span.max(1e-300) + max_step(x) * 0.1);
        let h_floor = 1e-14 * x0.abs().max(x1.abs()).max(span);
        let mut last_fac = 1e-4f64;
        while (x1 - x) * dir > 0.0 {
            if stats.accepted + stats.rejected >= self.max_steps {
                return Err(Error::ToleranceNotMet { steps: stats.accepted + stats.rejected });
            }
            h = h.min(max_step(x)).min((x1 - x).abs());
            if h < h_floor {
                return Err(Error::StepUnderflow { x });
            }
            let s = dir * h;
            let k2 = f(x + C2 * s, &axpy(&y, s, &[(A21, &k1)]));
            let k3 = f(x + C3 * s, &axpy(&y, s, &[(A31, &k1), (A32, &k2)]));
            let k4 = f(x + C4 * s, &axpy(&y, s, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
            let k5 = f(x + C5 * s, &axpy(&y, s, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
            let k6 = f(
                x + s,
                &axpy(&y, s, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
            );
            let y_new = axpy(&y, s, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
            let x_new = if (x1 - x).abs() <= h { x1 } else { x + s };
            let k7 = f(x_new, &y_new);
            let mut err = 0.0;
            for i in 0..D {
                let e = s
                    * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
                let sc = self.atol + self.rtol * y[i].abs().max(y_new[i].abs());
                err += (e / sc).powi(2);
            }
            let err = (err / D as f64).sqrt();
            if !err.is_finite() {
                stats.rejected += 1;
                h *= 0.2;
                continue;
            }
            if err <= 1.0 {
                stats.accepted += 1;
                x = x_new;
                y = y_new;
                k1 = k7;
                // PI controller (Hairer's beta = 0.04)
                let fac = 0.9 * err.max(1e-10).powf(-0.17) * last_fac.powf(0.04);
                last_fac = err.max(1e-4);
                h *= fac.clamp(0.2, 5.0);
            } else {
                stats.rejected += 1;
                h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            }
        }
        Ok((y, stats))
    }
}
