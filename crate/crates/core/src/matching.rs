//! Gluing of the interior and exterior bases at `x_h = h^{1−ε}` into the
//! normalized transfer matrix, and least-squares extraction of the
//! correction matrices.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::interior::{cauchy_at_matching, solve_basis, InteriorConfig};
use crate::ode::Dopri5;
use crate::potential::Potential;
use crate::wkb::{build_quasimode, CauchyDatum, QuasimodeOptions, Sign};

type C2 = [[Complex64; 2]; 2];

/// How the exterior basis is carried from `b` to `x_h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExteriorMode {
    /// Quasimode corrected to an exact solution by variation of constants.
    Corrected,
    /// The truncated quasimode itself.
    Quasimode,
}

#[derive(Debug, Clone, Copy)]
pub struct MatchConfig {
    pub order: usize,
    /// Interior `delta`; `None` means `gamma / 2`.
    pub delta_int: Option<f64>,
    /// Overrides `delta_int` through `delta = gamma − eps (gamma + 1)`.
    pub eps: Option<f64>,
    pub mode: ExteriorMode,
    pub quasimode: QuasimodeOptions,
    pub ode: Dopri5,
    /// Bound on `imag_defect / ‖M‖`.
    pub imag_tol: f64,
    pub cond_limit: f64,
}

impl Default for MatchConfig {
    fn default() -> Self {
        Self {
            order: 4,
            delta_int: None,
            eps: None,
            mode: ExteriorMode::Corrected,
            quasimode: QuasimodeOptions::default(),
            ode: Dopri5::default(),
            imag_tol: 1e-6,
            cond_limit: 1e8,
        }
    }
}

impl MatchConfig {
    pub fn interior(&self, p: &Potential, e: f64, h: f64) -> Result<InteriorConfig> {
        match self.eps {
            Some(eps) => InteriorConfig::with_eps(p, e, h, eps),
            None => InteriorConfig::new(p, e, h, self.delta_int),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub entries: [[f64; 2]; 2],
    pub e: f64,
    pub h: f64,
    pub sigma: f64,
    pub imag_defect: f64,
    /// Propagated interior and integrator error, for comparisons between runs.
    pub error_budget: f64,
    pub x_match: f64,
}

impl TransferMatrix {
    pub fn det(&self) -> f64 {
        let m = &self.entries;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Frobenius distance to the leading rotation by `sigma / h`.
    pub fn distance_to_leading(&self) -> f64 {
        let d = leading(self.sigma, self.h);
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                s += (self.entries[i][j] - d[i][j]).powi(2);
            }
        }
        s.sqrt()
    }

    pub fn csv_row(&self) -> [f64; 8] {
        let m = &self.entries;
        [self.h, self.e, m[0][0], m[0][1], m[1][0], m[1][1], self.det(), self.imag_defect]
    }
}

/// Rotation by `sigma / h`.
pub fn leading(sigma: f64, h: f64) -> [[f64; 2]; 2] {
    let (s, c) = (sigma / h).sin_cos();
    [[c, -s], [s, c]]
}

fn columns(a: &CauchyDatum, b: &CauchyDatum) -> C2 {
    [[a.value, b.value], [a.h_derivative, b.h_derivative]]
}

fn mat_mul(a: &C2, b: &C2) -> C2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn inverse(a: &C2) -> C2 {
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    [[a[1][1] / det, -a[0][1] / det], [-a[1][0] / det, a[0][0] / det]]
}

/// 2-norm condition number from the Frobenius norm and determinant.
fn condition(a: &C2) -> f64 {
    let f2: f64 = a.iter().flatten().map(|z| z.norm_sqr()).sum();
    let det = (a[0][0] * a[1][1] - a[0][1] * a[1][0]).norm();
    let disc = (f2 * f2 - 4.0 * det * det).max(0.0).sqrt();
    let s1 = (0.5 * (f2 + disc)).sqrt();
    let s2 = det / s1;
    if s2 == 0.0 {
        f64::INFINITY
    } else {
        s1 / s2
    }
}

fn checked_inverse(a: &C2, location: &'static str, limit: f64) -> Result<(C2, f64)> {
    let cond = condition(a);
    if !(cond <= limit) {
        return Err(Error::IllConditionedBasis { location, cond });
    }
    Ok((inverse(a), cond))
}

/// Normalized transfer matrix taking `(q_b^{1/4} u(b), q_b^{-1/4} h u′(b))`
/// to `(E^{1/4} u(0), E^{-1/4} h u′(0))`.
pub fn connect(p: &Potential, e: f64, h: f64, cfg: &MatchConfig) -> Result<TransferMatrix> {
    let b = p.b();
    let icfg = cfg.interior(p, e, h)?;
    let x_h = icfg.x_match();
    if !(x_h < b) {
        return Err(Error::OutOfDomain { x: x_h, lo: 0.0, hi: b });
    }
    let sigma = p.sigma(e, 1e-13)?;

    // interior: normalized at 0, data at x_h
    let (plus, _) = solve_basis(p, &icfg)?;
    let psi_h = cauchy_at_matching(&plus, &icfg);
    let rt = e.sqrt();
    let i = Complex64::new(0.0, 1.0);
    let psi_0: C2 = [[1.0.into(), 1.0.into()], [i * rt, -i * rt]];
    let psi_x = columns(&psi_h, &psi_h.conj());

    // exterior: normalized at b, data at x_h
    let qm = build_quasimode(p, e, cfg.order, 0.5 * x_h, &cfg.quasimode)?;
    let ub = qm.evaluate(Sign::Plus, h, b)?;
    let ux = match cfg.mode {
        ExteriorMode::Corrected => qm.corrected_plus(h, x_h, &cfg.ode)?,
        ExteriorMode::Quasimode => qm.evaluate(Sign::Plus, h, x_h)?,
    };
    let u_b = columns(&ub, &ub.conj());
    let u_x = columns(&ux, &ux.conj());

    let (psi_x_inv, k_psi) = checked_inverse(&psi_x, "interior basis at x_h", cfg.cond_limit)?;
    let (u_b_inv, k_ub) = checked_inverse(&u_b, "exterior basis at b", cfg.cond_limit)?;
    let t = mat_mul(&mat_mul(&psi_0, &psi_x_inv), &mat_mul(&u_x, &u_b_inv));

    let qb = e - p.v(b);
    let n0 = [e.powf(0.25), e.powf(-0.25)];
    let nb_inv = [qb.powf(-0.25), qb.powf(0.25)];
    let mut entries = [[0.0; 2]; 2];
    let mut imag_defect = 0.0f64;
    for r in 0..2 {
        for c in 0..2 {
            let z = n0[r] * t[r][c] * nb_inv[c];
            entries[r][c] = z.re;
            imag_defect = imag_defect.max(z.im.abs());
        }
    }
    let m = TransferMatrix {
        entries,
        e,
        h,
        sigma,
        imag_defect,
        error_budget: 0.0,
        x_match: x_h,
    };
    let norm = m.norm();
    if imag_defect > cfg.imag_tol * norm {
        return Err(Error::ToleranceExceeded { what: "imag_defect", value: imag_defect, limit: cfg.imag_tol * norm });
    }
    let ode_err = match cfg.mode {
        ExteriorMode::Corrected => 10.0 * cfg.ode.rtol * k_ub,
        ExteriorMode::Quasimode => qm.residual(h, x_h)? / h,
    };
    let error_budget = norm * (plus.error_estimate * k_psi + ode_err);
    Ok(TransferMatrix { error_budget, ..m })
}

/// One coefficient row of a correction fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitCoefficient {
    /// Matrix entry as `(row, column)`.
    pub entry: (usize, usize),
    pub m: u32,
    pub n: u32,
    pub exponent: f64,
    pub a_plus: f64,
    pub a_minus: f64,
}

#[derive(Debug, Clone)]
pub struct CorrectionFit {
    pub coefficients: Vec<FitCoefficient>,
    /// `‖y − X a‖ / ‖y‖` over all four entries.
    pub residual: f64,
    pub h_grid: Vec<f64>,
}

impl CorrectionFit {
    /// Smallest exponent whose coefficient exceeds `factor × residual × scale`
    /// in some entry, where `scale` is the largest coefficient.
    pub fn smallest_active(&self, factor: f64) -> Option<f64> {
        let scale = self.coefficients.iter().map(|c| c.a_plus.abs().max(c.a_minus.abs())).fold(0.0, f64::max);
        self.coefficients
            .iter()
            .filter(|c| c.a_plus.abs().max(c.a_minus.abs()) > factor * self.residual * scale)
            .map(|c| c.exponent)
            .min_by(f64::total_cmp)
    }

    pub fn csv_rows(&self) -> Vec<(String, u32, u32, f64, f64)> {
        self.coefficients
            .iter()
            .map(|c| (format!("m{}{}", c.entry.0 + 1, c.entry.1 + 1), c.m, c.n, c.a_plus, c.a_minus))
            .collect()
    }
}

/// Lattice exponents `mγ + n`, `(m, n) ≠ (0, 0)`, deduplicated and sorted.
pub fn lattice_exponents(gamma: f64, max_m: u32, max_n: u32) -> Vec<(u32, u32, f64)> {
    let mut out: Vec<(u32, u32, f64)> = Vec::new();
    for m in 0..=max_m {
        for n in 0..=max_n {
            if m == 0 && n == 0 {
                continue;
            }
            let v = m as f64 * gamma + n as f64;
            if !out.iter().any(|o| (o.2 - v).abs() < 1e-9) {
                out.push((m, n, v));
            }
        }
    }
    out.sort_by(|a, b| a.2.total_cmp(&b.2));
    out
}

/// Samples of `M(h) − D(h)` for every `h` in the grid.
pub fn sample_corrections(p: &Potential, e: f64, h_grid: &[f64], cfg: &MatchConfig) -> Result<Vec<TransferMatrix>> {
    use rayon::prelude::*;
    h_grid.par_iter().map(|&h| connect(p, e, h, cfg)).collect()
}

struct LsqSolution {
    coeffs: Vec<f64>,
    residual_sq: f64,
}

fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<LsqSolution> {
    let cols = x.ncols();
    // column scaling keeps h^α columns of very different size comparable
    let mut scaled = x.clone();
    let mut scales = vec![1.0; cols];
    for (j, s) in scales.iter_mut().enumerate() {
        let nrm = scaled.column(j).norm();
        if nrm > 0.0 {
            *s = nrm;
            scaled.column_mut(j).scale_mut(1.0 / nrm);
        }
    }
    let svd = scaled.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd.singular_values.iter().filter(|s| **s > 1e-10 * smax).count();
    if rank < cols {
        return Err(Error::RankDeficient { rank, cols });
    }
    let a = svd.solve(y, 0.0).map_err(|_| Error::RankDeficient { rank, cols })?;
    let r = y - &scaled * &a;
    Ok(LsqSolution { coeffs: a.iter().zip(&scales).map(|(a, s)| a / s).collect(), residual_sq: r.norm_squared() })
}

fn fit_from_samples(samples: &[TransferMatrix], exps: &[f64]) -> Result<(Vec<[Vec<f64>; 2]>, f64)> {
    let rows = samples.len();
    let cols = 2 * exps.len();
    if rows < 2 * cols {
        return Err(Error::InvalidParameter(format!("the fit needs at least {} h values, got {rows}", 2 * cols)));
    }
    let mut x = DMatrix::zeros(rows, cols);
    for (i, s) in samples.iter().enumerate() {
        let (sn, cs) = (s.sigma / s.h).sin_cos();
        for (j, &a) in exps.iter().enumerate() {
            let hp = s.h.powf(a);
            x[(i, j)] = cs * hp;
            x[(i, exps.len() + j)] = sn * hp;
        }
    }
    let mut per_entry = Vec::with_capacity(4);
    let (mut res, mut tot) = (0.0, 0.0);
    for r in 0..2 {
        for c in 0..2 {
            let y = DVector::from_iterator(
                rows,
                samples.iter().map(|s| s.entries[r][c] - leading(s.sigma, s.h)[r][c]),
            );
            let sol = least_squares(&x, &y)?;
            res += sol.residual_sq;
            tot += y.norm_squared();
            let (ap, am) = sol.coeffs.split_at(exps.len());
            per_entry.push([ap.to_vec(), am.to_vec()]);
        }
    }
    let rel = if tot > 0.0 { (res / tot).sqrt() } else { 0.0 };
    Ok((per_entry, rel))
}

/// Least-squares fit of `M − D = cos(σ/h) Σ a⁺ h^{mγ+n} + sin(σ/h) Σ a⁻ h^{mγ+n}`.
pub fn fit_corrections(
    p: &Potential,
    e: f64,
    h_grid: &[f64],
    max_m: u32,
    max_n: u32,
    cfg: &MatchConfig,
) -> Result<CorrectionFit> {
    let samples = sample_corrections(p, e, h_grid, cfg)?;
    fit_samples(p.gamma(), &samples, max_m, max_n)
}

/// [`fit_corrections`] on precomputed transfer matrices.
pub fn fit_samples(gamma: f64, samples: &[TransferMatrix], max_m: u32, max_n: u32) -> Result<CorrectionFit> {
    let lattice = lattice_exponents(gamma, max_m, max_n);
    let exps: Vec<f64> = lattice.iter().map(|l| l.2).collect();
    let (per_entry, residual) = fit_from_samples(samples, &exps)?;
    let mut coefficients = Vec::new();
    for (idx, coeffs) in per_entry.iter().enumerate() {
        for (j, &(m, n, exponent)) in lattice.iter().enumerate() {
            coefficients.push(FitCoefficient {
                entry: (idx / 2, idx % 2),
                m,
                n,
                exponent,
                a_plus: coeffs[0][j],
                a_minus: coeffs[1][j],
            });
        }
    }
    Ok(CorrectionFit { coefficients, residual, h_grid: samples.iter().map(|s| s.h).collect() })
}

/// Profile scan for the leading correction exponent: the smallest lattice
/// exponent is replaced by a free `alpha` and the relative residual is
/// minimized over `alphas`. Returns `(alpha, residual)`.
pub fn leading_exponent_scan(
    gamma: f64,
    samples: &[TransferMatrix],
    max_m: u32,
    max_n: u32,
    alphas: &[f64],
) -> Result<(f64, f64)> {
    let lattice = lattice_exponents(gamma, max_m, max_n);
    let rest: Vec<f64> = lattice.iter().skip(1).map(|l| l.2).collect();
    let mut best: Option<(f64, f64)> = None;
    for &alpha in alphas {
        if rest.iter().any(|r| (r - alpha).abs() < 0.02) {
            continue;
        }
        let mut exps = vec![alpha];
        exps.extend_from_slice(&rest);
        let (_, res) = match fit_from_samples(samples, &exps) {
            Ok(v) => v,
            Err(Error::RankDeficient { .. }) => continue,
            Err(e) => return Err(e),
        };
        if best.map_or(true, |b| res < b.1) {
            best = Some((alpha, res));
        }
    }
    best.ok_or(Error::RankDeficient { rank: 0, cols: 2 * (rest.len() + 1) })
}
