//! Chebyshev–Lobatto collocation on `[x_lo, x_hi]` in the logarithmic variable
//! `s = ln x`.
//!
//! The WKB amplitudes behave like sums of `x^{mγ+j}` near `x_lo`, which are
//! entire functions of `s`, so the mapped grid resolves them with a few hundred
//! nodes where a linear grid would need thousands.

use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, OnceLock};

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

#[derive(Clone)]
struct Plan(Arc<dyn Fft<f64>>);

impl fmt::Debug for Plan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Plan({})", self.0.len())
    }
}

/// A Chebyshev–Lobatto grid with `n + 1` nodes mapped through `x = exp(s)`.
#[derive(Debug, Clone)]
pub struct ChebGrid {
    n: usize,
    x_lo: f64,
    x_hi: f64,
    s_mid: f64,
    half: f64,
    t: Vec<f64>,
    x: Vec<f64>,
    diff: OnceLock<Vec<f64>>,
    // cos(r π / n) for r in 0..2n
    cos_table: Vec<f64>,
    fft: Plan,
}

impl ChebGrid {
    pub fn new(x_lo: f64, x_hi: f64, n: usize) -> Self {
        assert!(x_lo > 0.0 && x_hi > x_lo && n >= 2);
        let (s_lo, s_hi) = (x_lo.ln(), x_hi.ln());
        let s_mid = 0.5 * (s_lo + s_hi);
        let half = 0.5 * (s_hi - s_lo);
        let t: Vec<f64> = (0..=n).map(|j| (j as f64 * PI / n as f64).cos()).collect();
        let mut x: Vec<f64> = t.iter().map(|t| (s_mid + half * t).exp()).collect();
        x[0] = x_hi;
        x[n] = x_lo;
        let cos_table = (0..2 * n).map(|r| (r as f64 * PI / n as f64).cos()).collect();
        let fft = Plan(FftPlanner::new().plan_fft_forward(2 * n));
        Self { n, x_lo, x_hi, s_mid, half, t, x, diff: OnceLock::new(), cos_table, fft }
    }

    // Differentiation matrix in t, with the negative-sum diagonal.
    fn diff_matrix(t: &[f64]) -> Vec<f64> {
        let np1 = t.len();
        let n = np1 - 1;
        let c = |i: usize| if i == 0 || i == n { 2.0 } else { 1.0 };
        let mut d = vec![0.0; np1 * np1];
        for i in 0..np1 {
            let mut row_sum = 0.0;
            for j in 0..np1 {
                if i != j {
                    let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                    // t_i - t_j via the sine form avoids cancellation
                    let ti_tj = -2.0
                        * ((i + j) as f64 * PI / (2 * n) as f64).sin()
                        * ((i as f64 - j as f64) * PI / (2 * n) as f64).sin();
                    let v = c(i) / c(j) * sign / ti_tj;
                    d[i * np1 + j] = v;
                    row_sum += v;
                }
            }
            d[i * np1 + i] = -row_sum;
        }
        d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_lo(&self) -> f64 {
        self.x_lo
    }

    pub fn x_hi(&self) -> f64 {
        self.x_hi
    }

    /// Physical nodes, from `x_hi` (index 0) down to `x_lo` (index n).
    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_lo * (1.0 - 1e-14) && x <= self.x_hi * (1.0 + 1e-14)
    }

    /// Nodal values of `f`.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        self.x.iter().map(|&x| f(x)).collect()
    }

    /// `d/dx` of nodal values.
    pub fn d_dx(&self, values: &[f64]) -> Vec<f64> {
        let np1 = self.n + 1;
        let diff = self.diff.get_or_init(|| Self::diff_matrix(&self.t));
        (0..np1)
            .map(|i| {
                let row = &diff[i * np1..(i + 1) * np1];
                let dt: f64 = row.iter().zip(values).map(|(d, v)| d * v).sum();
                dt / (self.half * self.x[i])
            })
            .collect()
    }

    /// `v_0 + (-1)^k v_n + 2 Σ_{0<j<n} v_j cos(jkπ/n)` for `k = 0..=n`, by FFT
    /// of the even extension.
    fn dct1(&self, v: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut buf: Vec<Complex<f64>> = (0..2 * n)
            .map(|j| Complex::new(if j <= n { v[j] } else { v[2 * n - j] }, 0.0))
            .collect();
        self.fft.0.process(&mut buf);
        buf[..=n].iter().map(|c| c.re).collect()
    }

    /// Chebyshev coefficients from nodal values (DCT-I).
    pub fn coefficients(&self, values: &[f64]) -> Vec<f64> {
        let n = self.n;
        let raw = self.dct1(values);
        raw.iter()
            .enumerate()
            .map(|(k, r)| if k == 0 || k == n { 0.5 * r / n as f64 } else { r / n as f64 })
            .collect()
    }

    /// `∫_x^{x_hi} g(y) dy` at every node, by spectral integration in `t`.
    pub fn integrate_from_hi(&self, values: &[f64]) -> Vec<f64> {
        let n = self.n;
        let weighted: Vec<f64> = values.iter().zip(&self.x).map(|(g, x)| g * x * self.half).collect();
        let c = self.coefficients(&weighted);
        let coef = |k: usize| if k <= n { c[k] } else { 0.0 };
        // antiderivative coefficients (B_0 = 0)
        let mut big_b = vec![0.0; n + 2];
        for (k, b) in big_b.iter_mut().enumerate().skip(1) {
            let prev = if k == 1 { 2.0 * coef(0) } else { coef(k - 1) };
            *b = (prev - coef(k + 1)) / (2 * k) as f64;
        }
        let at_one: f64 = big_b.iter().sum();
        let bt = self.values(&big_b[..=n]);
        // node 0 is x_hi itself, where the integral is empty
        (0..=n)
            .map(|j| if j == 0 { 0.0 } else { at_one - bt[j] - big_b[n + 1] * self.cos_index(j * (n + 1)) })
            .collect()
    }

    /// Nodal values of a coefficient vector (inverse DCT-I).
    pub fn values(&self, coeffs: &[f64]) -> Vec<f64> {
        let n = self.n;
        if coeffs.len() == n + 1 {
            let mut c = coeffs.to_vec();
            c[0] *= 2.0;
            c[n] *= 2.0;
            return self.dct1(&c).iter().map(|r| 0.5 * r).collect();
        }
        (0..=n)
            .map(|j| coeffs.iter().enumerate().map(|(k, c)| c * self.cos_index(j * k)).sum())
            .collect()
    }

    /// `d/dx` through the coefficient recurrence after chopping the series at
    /// `chop_tol` relative to its largest coefficient. Much less round-off
    /// growth than the collocation matrix when applied repeatedly.
    pub fn d_dx_chopped(&self, values: &[f64], chop_tol: f64) -> Vec<f64> {
        let mut c = self.coefficients(values);
        chop(&mut c, chop_tol);
        let dt = self.values(&derivative_coefficients(&c));
        dt.iter().zip(&self.x).map(|(d, x)| d / (self.half * x)).collect()
    }

    /// Evaluates a coefficient vector at physical `x` (Clenshaw).
    pub fn eval(&self, coeffs: &[f64], x: f64) -> f64 {
        clenshaw(coeffs, self.t_of(x))
    }

    pub fn t_of(&self, x: f64) -> f64 {
        ((x.ln() - self.s_mid) / self.half).clamp(-1.0, 1.0)
    }

    /// Magnitude of the round-off floor of `order`-fold spectral differentiation
    /// relative to `max|f|`: `eps · n^{2·order}` scaled by the map.
    pub fn roundoff_estimate(&self, order: u32) -> f64 {
        let n2 = (self.n * self.n) as f64;
        f64::EPSILON * n2.powi(order as i32) / self.half.powi(order as i32)
    }

    /// Chebyshev node abscissa `t_j`.
    pub fn t_node(&self, j: usize) -> f64 {
        self.t[j]
    }

    // cos(m π / n) with the argument reduced modulo 2n.
    fn cos_index(&self, m: usize) -> f64 {
        self.cos_table[m % (2 * self.n)]
    }
}

/// Zeroes every coefficient after the last one above `tol · max|c|`.
pub fn chop(c: &mut [f64], tol: f64) {
    let max = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let keep = c.iter().rposition(|v| v.abs() > tol * max).map_or(0, |i| i + 1);
    for v in &mut c[keep..] {
        *v = 0.0;
    }
}

/// Coefficients of `d/dt Σ c_k T_k`.
pub fn derivative_coefficients(c: &[f64]) -> Vec<f64> {
    let m = c.len();
    let mut d = vec![0.0; m + 1];
    for k in (1..m).rev() {
        d[k - 1] = d[k + 1] + 2.0 * k as f64 * c[k];
    }
    d[0] *= 0.5;
    d.truncate(m);
    d
}

/// Clenshaw recurrence for `Σ c_k T_k(t)`.
pub fn clenshaw(coeffs: &[f64], t: f64) -> f64 {
    let mut b1 = 0.0;
    let mut b2 = 0.0;
    for &c in coeffs.iter().skip(1).rev() {
        let b0 = c + 2.0 * t * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    coeffs.first().copied().unwrap_or(0.0) + t * b1 - b2
}
