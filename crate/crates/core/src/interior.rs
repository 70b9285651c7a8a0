//! Interior solutions of `v̈ + v = f(z) v` on `[0, z_max]`, `z = √E x / h`,
//! with `f(z) = V(h z / √E) / E`, built from the Volterra form
//! `v = e± + K[v]`, `K[v](z) = ∫_0^z sin(z − ζ) f(ζ) v(ζ) dζ`.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::potential::Potential;
use crate::wkb::{CauchyDatum, Sign};

const I: Complex64 = Complex64::new(0.0, 1.0);
const MAX_POINTS: usize = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteriorConfig {
    pub delta_int: f64,
    pub eps: f64,
    pub z_max: f64,
    pub h: f64,
    pub e: f64,
    /// Initial step; halved until the Richardson check passes.
    pub dz: f64,
    pub richardson_tol: f64,
}

impl InteriorConfig {
    /// `delta_int` defaults to `gamma / 2`.
    pub fn new(p: &Potential, e: f64, h: f64, delta_int: Option<f64>) -> Result<Self> {
        let gamma = p.gamma();
        let delta = delta_int.unwrap_or(0.5 * gamma);
        if !(delta > 0.0 && delta < gamma) {
            return Err(Error::InvalidWindow(format!("interior delta {delta} not in (0, {gamma})")));
        }
        if !(e > 0.0) {
            return Err(Error::NonPositiveEnergy(e));
        }
        let eps = (gamma - delta) / (gamma + 1.0);
        let z_max = e.sqrt() * h.powf(-eps);
        Ok(Self { delta_int: delta, eps, z_max, h, e, dz: (z_max / 2000.0).min(0.05), richardson_tol: 1e-8 })
    }

    /// Same construction from `eps`: `delta = gamma − eps (gamma + 1)`.
    pub fn with_eps(p: &Potential, e: f64, h: f64, eps: f64) -> Result<Self> {
        Self::new(p, e, h, Some(p.gamma() - eps * (p.gamma() + 1.0)))
    }

    /// Physical matching point `x_h = h^{1−eps}`.
    pub fn x_match(&self) -> f64 {
        self.h.powf(1.0 - self.eps)
    }
}

#[derive(Debug, Clone)]
pub struct InteriorSolution {
    pub z_grid: Vec<f64>,
    pub v: Vec<Complex64>,
    pub v_dot: Vec<Complex64>,
    pub label: Sign,
    /// Richardson disagreement of the accepted step pair.
    pub error_estimate: f64,
}

impl InteriorSolution {
    pub fn conj(&self) -> Self {
        let flip = match self.label {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        };
        Self {
            z_grid: self.z_grid.clone(),
            v: self.v.iter().map(|c| c.conj()).collect(),
            v_dot: self.v_dot.iter().map(|c| c.conj()).collect(),
            label: flip,
            error_estimate: self.error_estimate,
        }
    }

    pub fn csv_rows(&self) -> Vec<[f64; 5]> {
        self.z_grid
            .iter()
            .zip(self.v.iter().zip(&self.v_dot))
            .map(|(z, (v, d))| [*z, v.re, v.im, d.re, d.im])
            .collect()
    }
}

fn grid(z_max: f64, dz: f64) -> (Vec<f64>, f64) {
    let n = (z_max / dz).ceil().max(1.0) as usize;
    let step = z_max / n as f64;
    ((0..=n).map(|i| i as f64 * step).collect(), step)
}

fn weight(p: &Potential, cfg: &InteriorConfig, z: &[f64]) -> Vec<f64> {
    let scale = cfg.h / cfg.e.sqrt();
    z.iter().map(|&z| p.v(z * scale) / cfg.e).collect()
}

/// Trapezoid march for `v = e + ∫_0^z sin(z−ζ) f v`, O(n) through the
/// `sin(z−ζ) = sin z cos ζ − cos z sin ζ` split. Returns `(v, v̇)`.
fn march(z: &[f64], step: f64, f: &[f64], sign: f64) -> (Vec<Complex64>, Vec<Complex64>) {
    let n = z.len();
    let mut v = Vec::with_capacity(n);
    let mut vd = Vec::with_capacity(n);
    let mut c_sum = Complex64::new(0.0, 0.0);
    let mut s_sum = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let (s, c) = z[i].sin_cos();
        let e = Complex64::from_polar(1.0, sign * z[i]);
        let vi = e + step * (s * c_sum - c * s_sum);
        let di = sign * I * e + step * (c * c_sum + s * s_sum + 0.5 * f[i] * vi);
        let w = if i == 0 { 0.5 } else { 1.0 };
        c_sum += w * c * f[i] * vi;
        s_sum += w * s * f[i] * vi;
        v.push(vi);
        vd.push(di);
    }
    (v, vd)
}

/// Applies the discretized kernel `∫_0^z sin(z−ζ) g(ζ) u(ζ) dζ` and its
/// cosine-kernel derivative.
fn apply_kernel(z: &[f64], step: f64, g: &[f64], u: &[Complex64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut out = Vec::with_capacity(z.len());
    let mut dout = Vec::with_capacity(z.len());
    let mut c_sum = Complex64::new(0.0, 0.0);
    let mut s_sum = Complex64::new(0.0, 0.0);
    for i in 0..z.len() {
        let (s, c) = z[i].sin_cos();
        out.push(step * (s * c_sum - c * s_sum));
        dout.push(step * (c * c_sum + s * s_sum + 0.5 * g[i] * u[i]));
        let w = if i == 0 { 0.5 } else { 1.0 };
        c_sum += w * c * g[i] * u[i];
        s_sum += w * s * g[i] * u[i];
    }
    (out, dout)
}

fn sup_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Solves for the `+` branch with Richardson-checked trapezoid marching.
fn solve_plus(p: &Potential, cfg: &InteriorConfig) -> Result<InteriorSolution> {
    let mut dz = cfg.dz;
    loop {
        let (z, step) = grid(cfg.z_max, dz);
        let (zf, stepf) = grid(cfg.z_max, 0.5 * step);
        if zf.len() > MAX_POINTS {
            return Err(Error::GridTooCoarse { disagreement: f64::INFINITY, points: zf.len() });
        }
        let (v, vd) = march(&z, step, &weight(p, cfg, &z), 1.0);
        let (vf, vdf) = march(&zf, stepf, &weight(p, cfg, &zf), 1.0);
        let mut disagreement = 0.0f64;
        let mut ve = Vec::with_capacity(z.len());
        let mut vde = Vec::with_capacity(z.len());
        for i in 0..z.len() {
            let (a, b) = (v[i], vf[2 * i]);
            let (da, db) = (vd[i], vdf[2 * i]);
            disagreement = disagreement.max((a - b).norm()).max((da - db).norm());
            ve.push((4.0 * b - a) / 3.0);
            vde.push((4.0 * db - da) / 3.0);
        }
        if disagreement <= cfg.richardson_tol {
            return Ok(InteriorSolution { z_grid: z, v: ve, v_dot: vde, label: Sign::Plus, error_estimate: disagreement });
        }
        if 2 * zf.len() > MAX_POINTS {
            return Err(Error::GridTooCoarse { disagreement, points: zf.len() });
        }
        dz = 0.5 * step;
    }
}

/// `∫_0^{z_max} |f|`, the sup-row-sum bound of the discretized kernel.
pub fn operator_norm(p: &Potential, cfg: &InteriorConfig) -> f64 {
    let (z, step) = grid(cfg.z_max, cfg.dz);
    let f = weight(p, cfg, &z);
    let n = f.len();
    step * (f.iter().map(|v| v.abs()).sum::<f64>() - 0.5 * (f[0].abs() + f[n - 1].abs()))
}

/// Interior basis `(ψ⁺, ψ⁻) = (I − K)^{-1} e±`.
pub fn solve_basis(p: &Potential, cfg: &InteriorConfig) -> Result<(InteriorSolution, InteriorSolution)> {
    let norm = operator_norm(p, cfg);
    if norm >= 0.5 {
        return Err(Error::ContractionFailure { norm });
    }
    let plus = solve_plus(p, cfg)?;
    let minus = plus.conj();
    Ok((plus, minus))
}

/// Successive Picard updates `‖v_{n+1} − v_n‖_∞` for the `+` branch on the
/// base grid.
pub fn picard_differences(p: &Potential, cfg: &InteriorConfig, iterations: usize) -> Vec<f64> {
    let (z, step) = grid(cfg.z_max, cfg.dz);
    let f = weight(p, cfg, &z);
    let e: Vec<Complex64> = z.iter().map(|&z| Complex64::from_polar(1.0, z)).collect();
    let mut v = e.clone();
    let mut out = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let (k, _) = apply_kernel(&z, step, &f, &v);
        let next: Vec<Complex64> = e.iter().zip(&k).map(|(a, b)| a + b).collect();
        out.push(sup_diff(&next, &v));
        v = next;
    }
    out
}

/// Largest `n ≥ 0` with `n · delta_j < d_target`.
fn multiplicity(delta_j: f64, d_target: f64) -> usize {
    if delta_j >= d_target {
        return 0;
    }
    let mut n = (d_target / delta_j).floor() as usize;
    while n > 0 && n as f64 * delta_j >= d_target {
        n -= 1;
    }
    n
}

/// Truncated Neumann sum `T_D e⁺` on the base grid: all products of the
/// Taylor pieces `L_j` (kernel weight `(h ζ)^{γ+j} w_j`) in which index `j`
/// occurs at most `n_j` times.
pub fn truncated_neumann(p: &Potential, cfg: &InteriorConfig, d_target: f64) -> Result<(Vec<f64>, Vec<Complex64>)> {
    let gamma = p.gamma();
    let delta = cfg.delta_int;
    let step_d = (1.0 + delta) / (1.0 + gamma);
    let needed = (d_target / step_d).ceil() as usize;
    let taylor = p.w_taylor();
    if taylor.len() <= needed {
        return Err(Error::TaylorOrderInsufficient { available: taylor.len(), needed: needed + 1 });
    }
    let counts: Vec<usize> = (0..=needed).map(|j| multiplicity(delta + j as f64 * step_d, d_target)).collect();
    let active: Vec<usize> = (0..counts.len()).filter(|&j| counts[j] > 0).collect();

    let (z, step) = grid(cfg.z_max, cfg.dz);
    let e = cfg.e;
    let scale = cfg.h / e.sqrt();
    // (h ζ)^{γ+j} w_j with w_j = E^{-1-γ/2-j/2} W_j, i.e. the x-Taylor term of V/E
    let weights: HashMap<usize, Vec<f64>> = active
        .iter()
        .map(|&j| {
            let wj = taylor[j];
            (j, z.iter().map(|&z| (z * scale).powf(gamma + j as f64) * wj / e).collect())
        })
        .collect();

    let e_plus: Vec<Complex64> = z.iter().map(|&z| Complex64::from_polar(1.0, z)).collect();
    let mut memo: HashMap<Vec<usize>, Vec<Complex64>> = HashMap::new();
    let zero = vec![0usize; active.len()];
    memo.insert(zero.clone(), e_plus.clone());
    // enumerate count vectors in order of total size
    let mut frontier = vec![zero];
    let mut total = e_plus;
    while !frontier.is_empty() {
        let mut next_frontier: Vec<Vec<usize>> = Vec::new();
        for c in &frontier {
            for a in 0..active.len() {
                let mut child = c.clone();
                child[a] += 1;
                if child[a] > counts[active[a]] || memo.contains_key(&child) {
                    continue;
                }
                // F(c) = Σ_j L_j F(c − e_j)
                let mut acc = vec![Complex64::new(0.0, 0.0); z.len()];
                for b in 0..active.len() {
                    if child[b] == 0 {
                        continue;
                    }
                    let mut parent = child.clone();
                    parent[b] -= 1;
                    if let Some(prev) = memo.get(&parent) {
                        let (k, _) = apply_kernel(&z, step, &weights[&active[b]], prev);
                        for (x, y) in acc.iter_mut().zip(k) {
                            *x += y;
                        }
                    }
                }
                for (t, y) in total.iter_mut().zip(&acc) {
                    *t += y;
                }
                memo.insert(child.clone(), acc);
                next_frontier.push(child);
            }
        }
        frontier = next_frontier;
    }
    Ok((z, total))
}

/// `‖ψ⁺ − T_D e⁺‖_∞` on the base grid.
pub fn neumann_compare(p: &Potential, cfg: &InteriorConfig, d_target: f64) -> Result<f64> {
    let (plus, _) = solve_basis(p, cfg)?;
    let (z, t) = truncated_neumann(p, cfg, d_target)?;
    // the solved grid may be finer than the base grid; compare on common points
    let stride = (plus.z_grid.len() - 1) / (z.len() - 1);
    Ok(t.iter().enumerate().map(|(i, ti)| (plus.v[i * stride] - ti).norm()).fold(0.0, f64::max))
}

/// `(ψ(x_h), hψ′(x_h)) = (v(z_max), √E v̇(z_max))`.
pub fn cauchy_at_matching(sol: &InteriorSolution, cfg: &InteriorConfig) -> CauchyDatum {
    let last = sol.v.len() - 1;
    CauchyDatum { value: sol.v[last], h_derivative: cfg.e.sqrt() * sol.v_dot[last], at: cfg.x_match(), h: cfg.h }
}

/// `(c₊, c₋)` with `v = c₊e^{iz} + c₋e^{−iz}` matching value and derivative at `z_max`.
pub fn asymptotic_coefficients(sol: &InteriorSolution, cfg: &InteriorConfig) -> (Complex64, Complex64) {
    let last = sol.v.len() - 1;
    let (v, vd) = (sol.v[last], sol.v_dot[last]);
    let z = cfg.z_max;
    let cp = 0.5 * (v - I * vd) * Complex64::from_polar(1.0, -z);
    let cm = 0.5 * (v + I * vd) * Complex64::from_polar(1.0, z);
    (cp, cm)
}
