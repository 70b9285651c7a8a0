//! Exterior WKB quasimodes `u± = e^{±iS/h} Σ h^k A_k` on `[x_lo, b]`.
//!
//! Amplitudes are stored as real functions `a_k` with `A_k = i^k a_k`; the
//! transport recursion becomes `a_{k+1} = -(1/2) a_0 ∫_x^b a_0 a_k″`, anchored
//! at `b`. Each `a_k` is kept twice: on a log-mapped Chebyshev grid and as a
//! generalized Taylor expansion used below the crossover point.

use num_complex::Complex64;

use crate::chebyshev::ChebGrid;
use crate::error::{Error, Result};
use crate::gte::{default_order, Expansion};
use crate::ode::Dopri5;
use crate::potential::{binomial, Potential};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// `(u(x), h u'(x))` at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyDatum {
    pub value: Complex64,
    pub h_derivative: Complex64,
    pub at: f64,
    pub h: f64,
}

impl CauchyDatum {
    pub fn conj(&self) -> Self {
        Self { value: self.value.conj(), h_derivative: self.h_derivative.conj(), ..*self }
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.h_derivative.is_finite()
    }
}

/// `h²(u′v − uv′)` from two Cauchy data at the same point.
pub fn h2_wronskian(u: &CauchyDatum, v: &CauchyDatum) -> Complex64 {
    u.h * (u.h_derivative * v.value - u.value * v.h_derivative)
}

#[derive(Debug, Clone, Copy)]
pub struct QuasimodeOptions {
    pub n_cheb: usize,
    /// Truncation order of the near-0 series; `None` picks one from `gamma` and `N`.
    pub series_order: Option<f64>,
    /// Series are used for `x < crossover · x_lo`.
    pub crossover: f64,
    pub match_tol: f64,
    /// Bound on the relative Chebyshev tail of every `a_k`.
    pub diff_limit: f64,
    /// Relative level below which Chebyshev coefficients are treated as noise.
    pub chop_tol: f64,
    pub quad_tol: f64,
}

impl Default for QuasimodeOptions {
    fn default() -> Self {
        Self {
            n_cheb: 256,
            series_order: None,
            crossover: 2.0,
            match_tol: 1e-6,
            diff_limit: 1e-7,
            chop_tol: 1e-14,
            quad_tol: 1e-13,
        }
    }
}

#[derive(Debug, Clone)]
struct Amplitude {
    nodal: Vec<f64>,
    cheb: [Vec<f64>; 3],
    series: [Expansion; 3],
}

#[derive(Debug, Clone)]
pub struct Quasimode {
    potential: Potential,
    e: f64,
    n: usize,
    grid: ChebGrid,
    amps: Vec<Amplitude>,
    s_cheb: Vec<f64>,
    t_series: Expansion,
    sigma: f64,
    switch: f64,
    tail: Vec<f64>,
}

/// Builds `S` and `A_0..A_N` for energy `e` on `[x_lo, b]`.
pub fn build_quasimode(
    p: &Potential,
    e: f64,
    n: usize,
    x_lo: f64,
    opts: &QuasimodeOptions,
) -> Result<Quasimode> {
    let b = p.b();
    if !(x_lo > 0.0 && x_lo < b) {
        return Err(Error::OutOfDomain { x: x_lo, lo: 0.0, hi: b });
    }
    if !(e > 0.0) {
        return Err(Error::NonPositiveEnergy(e));
    }
    if opts.n_cheb < 64 {
        return Err(Error::InvalidPotential(format!("n_cheb = {} is below 64", opts.n_cheb)));
    }
    let gamma = p.gamma();
    let grid = ChebGrid::new(x_lo, b, opts.n_cheb);
    let q = grid.sample(|x| e - p.v(x));
    if let Some((i, &qmin)) = q.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)) {
        if qmin <= 0.0 {
            return Err(Error::NonPositiveGap { delta: qmin.min(e - p.v(grid.nodes()[i])) });
        }
    }

    // phase: S(x) = -∫_x^b √q
    let sqrt_q: Vec<f64> = q.iter().map(|q| q.sqrt()).collect();
    let s_nodal: Vec<f64> = grid.integrate_from_hi(&sqrt_q).iter().map(|v| -v).collect();
    let s_cheb = grid.coefficients(&s_nodal);
    let sigma = p.sigma(e, opts.quad_tol)?;
    let head = p.sigma(e, opts.quad_tol).and_then(|_| {
        crate::quadrature::integrate_graded(
            |y| (e - p.v(y)).sqrt(),
            x_lo,
            crate::quadrature::grading_exponent(gamma),
            opts.quad_tol,
        )
    })?;
    let phase_gap = (head - s_nodal[opts.n_cheb] - sigma).abs();
    if phase_gap > 1e-9 * sigma.max(1.0) {
        return Err(Error::ToleranceExceeded { what: "phase cross-check", value: phase_gap, limit: 1e-9 });
    }

    let order = opts
        .series_order
        .unwrap_or_else(|| (default_order(gamma) + n as f64 + 8.0).min(24.0));
    let a0_series = Expansion::compose_power(p, e, -0.25, order)?;
    let half_root = Expansion::compose_power(p, e, 0.5, order)?;
    let root_e = Expansion::constant(half_root.gamma(), e.sqrt(), order);
    let t_series = Expansion::add(&half_root, &root_e, 1.0, -1.0)?
        .antiderivative_from_b(0.0)?
        .scale(-1.0);

    // derivatives of a_0 = q^{-1/4} at the nodes, orders 0..=2N+2
    let top = 2 * n + 2;
    let a0d: Vec<Vec<f64>> = if p.derivative_order_available() >= top {
        let per_node: Vec<Vec<f64>> = grid.nodes().iter().map(|&x| a0_derivatives(p, e, x, top)).collect();
        (0..=top).map(|m| per_node.iter().map(|d| d[m]).collect()).collect()
    } else {
        let mut out = vec![q.iter().map(|q| q.powf(-0.25)).collect::<Vec<f64>>()];
        for m in 0..top {
            out.push(grid.d_dx_chopped(&out[m], opts.chop_tol));
        }
        out
    };
    let nodes = opts.n_cheb + 1;
    let switch = opts.crossover * x_lo;
    let check_x = switch.min(b);
    let mut amps = Vec::with_capacity(n + 1);
    let mut tail = Vec::with_capacity(n + 1);
    let mut ak = a0d.clone();
    let mut series = a0_series.clone();
    for k in 0..=n {
        let amp = Amplitude {
            cheb: [grid.coefficients(&ak[0]), grid.coefficients(&ak[1]), grid.coefficients(&ak[2])],
            series: [series.clone(), series.differentiate(), series.differentiate().differentiate()],
            nodal: ak[0].clone(),
        };
        let t = chebyshev_tail(&amp.cheb[0]);
        if k > 0 && t > opts.diff_limit {
            return Err(Error::DifferentiationUnstable { estimate: t, limit: opts.diff_limit });
        }
        tail.push(t);
        if k > 0 {
            let scale = amp
                .nodal
                .iter()
                .zip(grid.nodes())
                .filter(|(_, &x)| x <= 4.0 * x_lo)
                .map(|(v, _)| v.abs())
                .fold(0.0, f64::max);
            let c = grid.eval(&amp.cheb[0], check_x);
            let s = amp.series[0].evaluate(check_x);
            let rel = (c - s).abs() / scale.max(c.abs()).max(f64::MIN_POSITIVE);
            if rel > opts.match_tol {
                return Err(Error::RepresentationMismatch { k, x: check_x, rel });
            }
        }
        if k == n {
            amps.push(amp);
            break;
        }
        // a_{k+1} = -(1/2) a_0 G with G = ∫_x^b a_0 a_k″, G′ = -a_0 a_k″;
        // derivatives by Leibniz so only one spectral integration per level
        let m_next = 2 * (n - k);
        let g: Vec<Vec<f64>> = (0..m_next)
            .map(|i| {
                (0..nodes)
                    .map(|j| (0..=i).map(|l| binomial(i, l) * a0d[i - l][j] * ak[l + 2][j]).sum())
                    .collect()
            })
            .collect();
        let big_g = grid.integrate_from_hi(&g[0]);
        let g_deriv = |i: usize, j: usize| if i == 0 { big_g[j] } else { -g[i - 1][j] };
        ak = (0..=m_next)
            .map(|m| {
                (0..nodes)
                    .map(|j| -0.5 * (0..=m).map(|i| binomial(m, i) * a0d[m - i][j] * g_deriv(i, j)).sum::<f64>())
                    .collect()
            })
            .collect();

        let g_series = Expansion::mul(&a0_series, &amp.series[2])?;
        let bare = g_series.antiderivative_from_b_with_logs(0.0);
        let constant = big_g[opts.n_cheb] - bare.evaluate(x_lo);
        let shifted = Expansion::add(&bare, &Expansion::constant(bare.gamma(), constant, bare.order()), 1.0, 1.0)?;
        series = Expansion::mul(&a0_series, &shifted)?.scale(-0.5);
        amps.push(amp);
    }

    Ok(Quasimode { potential: p.clone(), e, n, grid, amps, s_cheb, t_series, sigma, switch, tail })
}

// Derivatives of (E - V)^{-1/4} at x from q y′ = α q′ y differentiated m times.
fn a0_derivatives(p: &Potential, e: f64, x: f64, top: usize) -> Vec<f64> {
    let alpha = -0.25;
    let mut q: Vec<f64> = p.v_derivatives(x, top).iter().map(|v| -v).collect();
    q[0] += e;
    let mut y = vec![q[0].powf(alpha)];
    for m in 0..top {
        let mut acc = 0.0;
        for i in 0..=m {
            acc += alpha * binomial(m, i) * q[i + 1] * y[m - i];
        }
        for i in 1..=m {
            acc -= binomial(m, i) * q[i] * y[m + 1 - i];
        }
        y.push(acc / q[0]);
    }
    y
}

// Largest coefficient among the top eighth, relative to the largest overall.
fn chebyshev_tail(c: &[f64]) -> f64 {
    let max = c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if max == 0.0 {
        return 0.0;
    }
    let start = c.len() - c.len() / 8;
    c[start..].iter().fold(0.0f64, |m, v| m.max(v.abs())) / max
}

impl Quasimode {
    pub fn energy(&self) -> f64 {
        self.e
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn x_lo(&self) -> f64 {
        self.grid.x_lo()
    }

    pub fn b(&self) -> f64 {
        self.grid.x_hi()
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn grid(&self) -> &ChebGrid {
        &self.grid
    }

    /// Relative Chebyshev tail of each `a_k` (resolution / round-off indicator).
    pub fn chebyshev_tails(&self) -> &[f64] {
        &self.tail
    }

    /// Series of `a_k` near 0 (`A_k = i^k a_k`).
    pub fn amplitude_series(&self, k: usize) -> &Expansion {
        &self.amps[k].series[0]
    }

    /// Series of `T_E(x) = ∫_0^x (√q − √E)`.
    pub fn t_series(&self) -> &Expansion {
        &self.t_series
    }

    fn check(&self, x: f64) -> Result<()> {
        if !self.grid.contains(x) {
            return Err(Error::OutOfDomain { x, lo: self.grid.x_lo(), hi: self.grid.x_hi() });
        }
        Ok(())
    }

    /// `d`-th derivative of the real amplitude `a_k` at `x` (d ≤ 2).
    pub fn real_amplitude(&self, k: usize, d: usize, x: f64) -> f64 {
        let amp = &self.amps[k];
        if d == 0 && x == self.grid.x_hi() {
            return amp.nodal[0];
        }
        if x < self.switch {
            amp.series[d].evaluate(x)
        } else {
            self.grid.eval(&amp.cheb[d], x)
        }
    }

    /// Complex amplitude `A_k^{(d)}(x)` of `u⁺`.
    pub fn amplitude(&self, k: usize, d: usize, x: f64) -> Complex64 {
        I.powu(k as u32) * self.real_amplitude(k, d, x)
    }

    /// Phase `S(x)` with `S(b) = 0`.
    pub fn phase(&self, x: f64) -> f64 {
        if x < self.switch {
            -self.sigma + x * self.e.sqrt() + self.t_series.evaluate(x)
        } else {
            self.grid.eval(&self.s_cheb, x)
        }
    }

    fn sqrt_q(&self, x: f64) -> f64 {
        (self.e - self.potential.v(x)).sqrt()
    }

    /// Cauchy datum of `u±` at `x`.
    pub fn evaluate(&self, sign: Sign, h: f64, x: f64) -> Result<CauchyDatum> {
        self.check(x)?;
        let (sum, dsum) = self.sums(h, x);
        let phase = Complex64::from_polar(1.0, self.phase(x) / h);
        let value = phase * sum;
        let h_derivative = phase * (I * self.sqrt_q(x) * sum + h * dsum);
        let d = CauchyDatum { value, h_derivative, at: x, h };
        Ok(match sign {
            Sign::Plus => d,
            Sign::Minus => d.conj(),
        })
    }

    // Σ h^k A_k and Σ h^k A_k′ for the + branch.
    fn sums(&self, h: f64, x: f64) -> (Complex64, Complex64) {
        let mut sum = Complex64::new(0.0, 0.0);
        let mut dsum = Complex64::new(0.0, 0.0);
        let mut w = Complex64::new(1.0, 0.0);
        for k in 0..=self.n {
            sum += w * self.real_amplitude(k, 0, x);
            dsum += w * self.real_amplitude(k, 1, x);
            w *= I * h;
        }
        (sum, dsum)
    }

    /// `h²u″ + q u` for `u⁺`, which equals `h^{N+2} A_N″ e^{iS/h}`.
    pub fn residual_term(&self, h: f64, x: f64) -> Complex64 {
        let a = self.amplitude(self.n, 2, x);
        h.powi(self.n as i32 + 2) * a * Complex64::from_polar(1.0, self.phase(x) / h)
    }

    /// `h^{N+2} |A_N″(x)|`.
    pub fn residual(&self, h: f64, x: f64) -> Result<f64> {
        self.check(x)?;
        Ok(h.powi(self.n as i32 + 2) * self.real_amplitude(self.n, 2, x).abs())
    }

    /// `max |h²W(u⁺, u⁻) − 2ih|` over `grid`.
    pub fn wronskian_defect(&self, h: f64, grid: &[f64]) -> Result<f64> {
        let mut worst = 0.0f64;
        for &x in grid {
            let up = self.evaluate(Sign::Plus, h, x)?;
            let um = up.conj();
            worst = worst.max((h2_wronskian(&up, &um) - 2.0 * I * h).norm());
        }
        Ok(worst)
    }

    /// Exact solution through the Cauchy datum of `u⁺` at `b`, written as
    /// `B⁺u⁺ + B⁻u⁻` and carried down to `x_to` by variation of constants.
    pub fn corrected_plus(&self, h: f64, x_to: f64, ode: &Dopri5) -> Result<CauchyDatum> {
        self.check(x_to)?;
        let b = self.b();
        // A_N″ ≡ 0 makes the quasimode exact
        let last = &self.amps[self.n];
        if last.cheb[2].iter().all(|c| *c == 0.0) && last.series[2].is_zero() {
            return self.evaluate(Sign::Plus, h, x_to);
        }
        let rhs = |x: f64, y: &[f64; 4]| -> [f64; 4] {
            let x = x.clamp(self.x_lo(), b);
            let up = match self.evaluate(Sign::Plus, h, x) {
                Ok(d) => d,
                Err(_) => return [f64::NAN; 4],
            };
            let um = up.conj();
            let rho = self.residual_term(h, x);
            let bp = Complex64::new(y[0], y[1]);
            let bm = Complex64::new(y[2], y[3]);
            let r = bp * rho + bm * rho.conj();
            let wr = h2_wronskian(&up, &um);
            let dbp = -um.value * r / wr;
            let dbm = up.value * r / wr;
            [dbp.re, dbp.im, dbm.re, dbm.im]
        };
        let cap = |x: f64| h / self.sqrt_q(x.clamp(0.0, b));
        let (y, _) = ode.solve(rhs, b, x_to, [1.0, 0.0, 0.0, 0.0], cap)?;
        let bp = Complex64::new(y[0], y[1]);
        let bm = Complex64::new(y[2], y[3]);
        let up = self.evaluate(Sign::Plus, h, x_to)?;
        let um = up.conj();
        Ok(CauchyDatum {
            value: bp * up.value + bm * um.value,
            h_derivative: bp * up.h_derivative + bm * um.h_derivative,
            at: x_to,
            h,
        })
    }

    /// Amplitude table `x,k,re(A_k),im(A_k)` on the Chebyshev nodes.
    pub fn amplitude_rows(&self) -> Vec<[f64; 4]> {
        let mut rows = Vec::new();
        for (j, &x) in self.grid.nodes().iter().enumerate().rev() {
            for k in 0..=self.n {
                let a = I.powu(k as u32) * self.amps[k].nodal[j];
                rows.push([x, k as f64, a.re, a.im]);
            }
        }
        rows
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gte::LatticeExponent;
    use crate::potential::Weight;

    fn linear() -> Potential {
        Potential::new(1.0, 1.0, Weight::Constant(1.0)).unwrap()
    }

    #[test]
    fn free_particle_is_exact() {
        let p = Potential::free(1.0).unwrap();
        let q = build_quasimode(&p, 1.0, 3, 0.01, &QuasimodeOptions::default()).unwrap();
        for x in [0.011, 0.3, 1.0] {
            assert!((q.real_amplitude(0, 0, x) - 1.0).abs() < 1e-13);
            for k in 1..=3 {
                assert!(q.real_amplitude(k, 0, x).abs() < 1e-12);
            }
            assert!((q.phase(x) - (x - 1.0)).abs() < 1e-13);
            let h = 0.01;
            let d = q.evaluate(Sign::Plus, h, x).unwrap();
            let expect = Complex64::from_polar(1.0, (x - 1.0) / h);
            assert!((d.value - expect).norm() < 1e-10);
            assert!((d.h_derivative - I * expect).norm() < 1e-10);
        }
        let grid: Vec<f64> = (1..=20).map(|i| i as f64 / 20.0).collect();
        assert!(q.wronskian_defect(0.05, &grid).unwrap() < 1e-13);
    }

    #[test]
    fn amplitudes_vanish_at_b() {
        let q = build_quasimode(&linear(), 2.0, 4, 1e-3, &QuasimodeOptions::default()).unwrap();
        for k in 1..=4 {
            assert_eq!(q.real_amplitude(k, 0, 1.0), 0.0);
        }
        let a0 = |x: f64| (2.0 - x).powf(-0.25);
        assert!((q.real_amplitude(0, 0, 0.37) - a0(0.37)).abs() < 1e-13);
    }

    #[test]
    fn first_amplitude_at_zero_against_simpson() {
        // a_1(0) = -(1/2) a_0(0) ∫_0^1 a_0 a_0″, a_0 = (2−x)^{-1/4}
        let n = 100_000;
        let f = |x: f64| (2.0 - x).powf(-0.25) * (5.0 / 16.0) * (2.0 - x).powf(-2.25);
        let hstep = 1.0 / n as f64;
        let mut s = f(0.0) + f(1.0);
        for i in 1..n {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * hstep);
        }
        let expect = -0.5 * 2f64.powf(-0.25) * s * hstep / 3.0;
        let q = build_quasimode(&linear(), 2.0, 2, 1e-3, &QuasimodeOptions::default()).unwrap();
        let got = q.amplitude_series(1).evaluate(0.0);
        assert!((got - expect).abs() < 1e-8, "{got} vs {expect}");
    }

    #[test]
    fn half_power_amplitude_exponent() {
        let p = Potential::new(0.5, 1.0, Weight::Constant(1.0)).unwrap();
        let q = build_quasimode(&p, 2.0, 2, 1e-3, &QuasimodeOptions::default()).unwrap();
        let a1 = q.amplitude_series(1);
        let lowest = LatticeExponent::new(1, -1);
        assert!((a1.lowest() - (-0.5)).abs() < 1e-14);
        assert!(a1.coefficient(lowest, 0).abs() > 1e-6);
    }

    #[test]
    fn conjugate_branch_and_wronskian_at_b() {
        let q = build_quasimode(&linear(), 2.0, 1, 1e-2, &QuasimodeOptions::default()).unwrap();
        let h = 0.05;
        let up = q.evaluate(Sign::Plus, h, 1.0).unwrap();
        let um = q.evaluate(Sign::Minus, h, 1.0).unwrap();
        assert_eq!(um, up.conj());
        // h²W(b) = 2ih + 2ih³ a_0(b) a_1′(b) for N = 1
        let w = h2_wronskian(&up, &um);
        let a0b = q.real_amplitude(0, 0, 1.0);
        let a1b = q.real_amplitude(1, 1, 1.0);
        let expect = 2.0 * I * h + 2.0 * I * h.powi(3) * a0b * a1b;
        assert!((w - expect).norm() < 1e-12);
    }

    #[test]
    fn residual_identity_by_finite_differences() {
        let q = build_quasimode(&linear(), 2.0, 2, 1e-2, &QuasimodeOptions::default()).unwrap();
        let h = 0.1;
        let x = 0.6;
        let u = |x: f64| q.evaluate(Sign::Plus, h, x).unwrap().value;
        let d = 1e-3;
        let upp = (-u(x + 2.0 * d) + 16.0 * u(x + d) - 30.0 * u(x) + 16.0 * u(x - d) - u(x - 2.0 * d))
            / (12.0 * d * d);
        let lhs = h * h * upp + (2.0 - x) * u(x);
        let rhs = q.residual_term(h, x);
        assert!((lhs - rhs).norm() < 1e-6 * rhs.norm().max(1e-10) + 1e-9, "{lhs} vs {rhs}");
    }
}
