//! Singular potentials `V(x) = x^gamma W(x)` on `[0, b]`, the admissibility
//! checks they must pass, and the action integrals built from `E - V`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{grading_exponent, integrate_graded};

/// Default number of Taylor coefficients kept for `W` at 0.
pub const DEFAULT_TAYLOR_ORDER: usize = 24;
/// Validation grid size used by the built-in checks.
pub const VALIDATION_GRID: usize = 2048;
const ROUNDOFF: f64 = 1e-12;

/// A smooth weight `W` on `[0, b]` with access to derivatives and to its
/// Taylor coefficients at 0.
pub trait WeightFunction: Send + Sync + fmt::Debug {
    /// `[W(x), W'(x), ..., W^(order)(x)]`.
    fn derivatives(&self, x: f64, order: usize) -> Vec<f64>;

    /// Taylor coefficients `w_0, ..., w_{order}` at 0 (ascending).
    fn taylor(&self, order: usize) -> Vec<f64>;

    fn value(&self, x: f64) -> f64 {
        self.derivatives(x, 0)[0]
    }

    /// Highest derivative order `derivatives` returns reliably.
    fn max_derivative_order(&self) -> usize {
        usize::MAX
    }
}

/// Built-in closed-form weights.
#[derive(Debug, Clone, PartialEq)]
pub enum Weight {
    Constant(f64),
    /// Polynomial with ascending coefficients.
    Polynomial(Vec<f64>),
    /// `exp(P(x))` for a polynomial `P` with ascending coefficients.
    ExpPoly(Vec<f64>),
}

fn poly_derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs.iter().enumerate().skip(1).map(|(i, c)| i as f64 * c).collect()
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl WeightFunction for Weight {
    fn derivatives(&self, x: f64, order: usize) -> Vec<f64> {
        match self {
            Weight::Constant(c) => {
                let mut out = vec![0.0; order + 1];
                out[0] = *c;
                out
            }
            Weight::Polynomial(coeffs) => {
                let mut out = Vec::with_capacity(order + 1);
                let mut current = coeffs.clone();
                for _ in 0..=order {
                    out.push(horner(&current, x));
                    current = poly_derivative(&current);
                }
                out
            }
            Weight::ExpPoly(coeffs) => {
                // W^(n) = sum_k C(n-1,k) P^(k+1) W^(n-1-k)
                let mut p_derivs = Vec::with_capacity(order + 1);
                let mut current = coeffs.clone();
                for _ in 0..=order {
                    p_derivs.push(horner(&current, x));
                    current = poly_derivative(&current);
                }
                let mut w = vec![p_derivs[0].exp()];
                for n in 1..=order {
                    let mut acc = 0.0;
                    for k in 0..n {
                        acc += binomial(n - 1, k) * p_derivs[k + 1] * w[n - 1 - k];
                    }
                    w.push(acc);
                }
                w
            }
        }
    }

    fn taylor(&self, order: usize) -> Vec<f64> {
        let mut out = vec![0.0; order + 1];
        match self {
            Weight::Constant(c) => out[0] = *c,
            Weight::Polynomial(coeffs) => {
                for (o, c) in out.iter_mut().zip(coeffs) {
                    *o = *c;
                }
            }
            Weight::ExpPoly(coeffs) => {
                let p = |j: usize| coeffs.get(j).copied().unwrap_or(0.0);
                out[0] = p(0).exp();
                for n in 1..=order {
                    let mut acc = 0.0;
                    for k in 1..=n {
                        acc += k as f64 * p(k) * out[n - k];
                    }
                    out[n] = acc / n as f64;
                }
            }
        }
        out
    }
}

/// A user-supplied weight: evaluation closure plus Taylor list at 0.
/// Derivatives up to second order come from fourth-order central differences
/// at spacing `max(1e-5, x/100)`.
pub struct FnWeight {
    f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    taylor: Vec<f64>,
}

impl FnWeight {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static, taylor: Vec<f64>) -> Self {
        Self { f: Box::new(f), taylor }
    }
}

impl fmt::Debug for FnWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnWeight").field("taylor", &self.taylor).finish()
    }
}

impl WeightFunction for FnWeight {
    fn derivatives(&self, x: f64, order: usize) -> Vec<f64> {
        let f = &self.f;
        let s = (x.abs() / 100.0).max(1e-5);
        let (fm2, fm1, f0, fp1, fp2) = (f(x - 2.0 * s), f(x - s), f(x), f(x + s), f(x + 2.0 * s));
        let mut out = vec![f0];
        if order >= 1 {
            out.push((fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * s));
        }
        if order >= 2 {
            out.push((-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * s * s));
        }
        out.resize(order + 1, f64::NAN);
        out
    }

    fn max_derivative_order(&self) -> usize {
        2
    }

    fn taylor(&self, order: usize) -> Vec<f64> {
        let mut t = self.taylor.clone();
        t.resize(order + 1, 0.0);
        t
    }
}

/// `V(x) = x^gamma W(x)` on `[0, b]`.
#[derive(Debug, Clone)]
pub struct Potential {
    gamma: f64,
    b: f64,
    w: Arc<dyn WeightFunction>,
    w_taylor: Vec<f64>,
    degenerate: bool,
}

impl Potential {
    /// Builds a potential and checks `gamma > 0`, `b > 0`, positivity of `W` and
    /// agreement of the Taylor list with the handle at 0.
    pub fn new(gamma: f64, b: f64, w: impl WeightFunction + 'static) -> Result<Self> {
        Self::build(gamma, b, Arc::new(w), false, DEFAULT_TAYLOR_ORDER)
    }

    pub fn with_taylor_order(
        gamma: f64,
        b: f64,
        w: impl WeightFunction + 'static,
        order: usize,
    ) -> Result<Self> {
        Self::build(gamma, b, Arc::new(w), false, order)
    }

    /// The degenerate override `W ≡ 0` (so `V ≡ 0`), used for exact-solution tests.
    pub fn free(b: f64) -> Result<Self> {
        Self::build(1.0, b, Arc::new(Weight::Constant(0.0)), true, DEFAULT_TAYLOR_ORDER)
    }

    /// Like [`Potential::new`] but permits `W` to vanish when `allow_degenerate` is set.
    pub fn from_weight(
        gamma: f64,
        b: f64,
        w: Arc<dyn WeightFunction>,
        allow_degenerate: bool,
        taylor_order: usize,
    ) -> Result<Self> {
        Self::build(gamma, b, w, allow_degenerate, taylor_order)
    }

    fn build(
        gamma: f64,
        b: f64,
        w: Arc<dyn WeightFunction>,
        degenerate: bool,
        taylor_order: usize,
    ) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidPotential(format!("gamma must be > 0, got {gamma}")));
        }
        if !(b > 0.0 && b.is_finite()) {
            return Err(Error::InvalidPotential(format!("b must be > 0, got {b}")));
        }
        let w_taylor = w.taylor(taylor_order);
        let w0 = w.value(0.0);
        if (w_taylor[0] - w0).abs() > 1e-10 * w0.abs().max(1.0) {
            return Err(Error::InvalidPotential(format!(
                "Taylor coefficient w_0 = {} disagrees with W(0) = {w0}",
                w_taylor[0]
            )));
        }
        let p = Self { gamma, b, w, w_taylor, degenerate };
        if !degenerate {
            p.check_weight_positive(VALIDATION_GRID)?;
        }
        Ok(p)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    pub fn weight(&self) -> &Arc<dyn WeightFunction> {
        &self.w
    }

    /// Taylor coefficients of `W` at 0.
    pub fn w_taylor(&self) -> &[f64] {
        &self.w_taylor
    }

    /// `W(x)`; the Taylor list is used for `x < 0.01 b`.
    pub fn w_at(&self, x: f64) -> f64 {
        if x < 0.01 * self.b {
            horner(&self.w_taylor, x)
        } else {
            self.w.value(x)
        }
    }

    fn check_domain(&self, x: f64) -> Result<()> {
        if !(0.0..=self.b).contains(&x) {
            return Err(Error::OutOfDomain { x, lo: 0.0, hi: self.b });
        }
        Ok(())
    }

    /// `V(x) = x^gamma W(x)`, exactly 0 at `x = 0`.
    pub fn v_at(&self, x: f64) -> Result<f64> {
        self.check_domain(x)?;
        Ok(self.v(x))
    }

    /// Unchecked `V(x)` for hot loops; callers guarantee `x ∈ [0, b]`.
    #[inline]
    pub fn v(&self, x: f64) -> f64 {
        if x <= 0.0 || self.degenerate && self.w_taylor.iter().all(|c| *c == 0.0) {
            return 0.0;
        }
        x.powf(self.gamma) * self.w_at(x)
    }

    /// `V'(x)` for `x > 0` from the handle derivatives.
    pub fn v_prime(&self, x: f64) -> f64 {
        let d = self.w.derivatives(x, 1);
        let xg = x.powf(self.gamma);
        self.gamma * xg / x * d[0] + xg * d[1]
    }

    /// `[V(x), V'(x), ..., V^(order)(x)]` for `x > 0` by the product rule.
    pub fn v_derivatives(&self, x: f64, order: usize) -> Vec<f64> {
        if self.degenerate && self.w_taylor.iter().all(|c| *c == 0.0) {
            return vec![0.0; order + 1];
        }
        let w = self.w.derivatives(x, order);
        let mut xg = Vec::with_capacity(order + 1);
        let mut falling = 1.0;
        for i in 0..=order {
            xg.push(falling * x.powf(self.gamma - i as f64));
            falling *= self.gamma - i as f64;
        }
        (0..=order)
            .map(|m| (0..=m).map(|i| binomial(m, i) * xg[i] * w[m - i]).sum())
            .collect()
    }

    /// Highest order for which [`Potential::v_derivatives`] is reliable.
    pub fn derivative_order_available(&self) -> usize {
        self.w.max_derivative_order()
    }

    fn grid(&self, n: usize) -> impl Iterator<Item = f64> + '_ {
        let b = self.b;
        (0..n).map(move |i| b * i as f64 / (n - 1) as f64)
    }

    fn check_weight_positive(&self, n: usize) -> Result<()> {
        for x in self.grid(n) {
            let value = self.w.value(x);
            if !(value > 0.0) {
                return Err(Error::NonPositiveW { x, value });
            }
        }
        Ok(())
    }

    /// Checks admissibility on a grid of `grid_size` points and fills in the gap
    /// `delta = min_x (e_min - V(x))`.
    pub fn validate(&self, win: &EnergyWindow, grid_size: usize) -> Result<EnergyWindow> {
        if grid_size < 16 {
            return Err(Error::InvalidWindow(format!("grid_size {grid_size} < 16")));
        }
        if !self.degenerate {
            self.check_weight_positive(grid_size)?;
        }
        let xs: Vec<f64> = self.grid(grid_size).collect();
        let vs: Vec<f64> = xs.iter().map(|&x| self.v(x)).collect();
        for i in 1..xs.len() {
            let drop = vs[i - 1] - vs[i];
            if drop > ROUNDOFF {
                return Err(Error::NotIncreasing { x0: xs[i - 1], x1: xs[i], drop });
            }
            if !self.degenerate {
                let slope = self.v_prime(xs[i]);
                if slope.is_finite() && slope < -ROUNDOFF {
                    return Err(Error::NotIncreasing { x0: xs[i - 1], x1: xs[i], drop: -slope });
                }
            }
        }
        let delta = vs.iter().map(|v| win.e_min - v).fold(f64::INFINITY, f64::min);
        if !(delta > 0.0) {
            return Err(Error::NonPositiveGap { delta });
        }
        Ok(EnergyWindow { delta, ..*win })
    }

    /// The action `sigma_E = ∫_0^b sqrt(E - V)`.
    pub fn sigma(&self, e: f64, tol: f64) -> Result<f64> {
        self.sigma_with_grading(e, tol, grading_exponent(self.gamma))
    }

    /// `sigma_E` with an explicit substitution exponent (1 disables grading).
    pub fn sigma_with_grading(&self, e: f64, tol: f64, grading: u32) -> Result<f64> {
        integrate_graded(|y| (e - self.v(y)).sqrt(), self.b, grading, tol)
    }

    /// `d sigma / dE = ∫_0^b (E - V)^{-1/2} / 2`.
    pub fn sigma_prime(&self, e: f64, tol: f64) -> Result<f64> {
        integrate_graded(|y| 0.5 / (e - self.v(y)).sqrt(), self.b, grading_exponent(self.gamma), tol)
    }

    /// `T_E(x) = ∫_0^x [sqrt(E - V) - sqrt(E)] dy`.
    pub fn t_correction(&self, e: f64, x: f64, tol: f64) -> Result<f64> {
        self.check_domain(x)?;
        let se = e.sqrt();
        integrate_graded(
            |y| {
                let v = self.v(y);
                -v / ((e - v).sqrt() + se)
            },
            x,
            grading_exponent(self.gamma),
            tol,
        )
    }

    /// `W̃(y) = E^{-1-gamma/2} W(y / sqrt(E))`, the weight of the rescaled interior equation.
    pub fn w_tilde(&self, e: f64, y: f64) -> f64 {
        e.powf(-1.0 - 0.5 * self.gamma) * self.w_at(y / e.sqrt())
    }
}

/// The energy window `K = [e_min, e_max]` and its gap `delta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyWindow {
    pub e_min: f64,
    pub e_max: f64,
    pub delta: f64,
}

impl EnergyWindow {
    pub fn new(e_min: f64, e_max: f64) -> Result<Self> {
        if !(e_min <= e_max) {
            return Err(Error::InvalidWindow(format!("e_min {e_min} > e_max {e_max}")));
        }
        Ok(Self { e_min, e_max, delta: 0.0 })
    }

    pub fn contains(&self, e: f64) -> bool {
        (self.e_min..=self.e_max).contains(&e)
    }
}
