//! Dirichlet eigenvalues on `[0, b]` from the leading quantization rule and
//! from the matched transfer matrix, plus convergence studies.

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matching::{connect, MatchConfig};
use crate::oracle::{self, OracleConfig};
use crate::potential::{EnergyWindow, Potential};
use crate::roots::{brent, loglog_slope};

const SIGMA_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    BsLeading,
    Matched,
    Oracle,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::BsLeading => "bs_leading",
            Method::Matched => "matched",
            Method::Oracle => "oracle",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "bs_leading" => Ok(Method::BsLeading),
            "matched" => Ok(Method::Matched),
            "oracle" => Ok(Method::Oracle),
            other => Err(Error::ConfigParse(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    pub h: f64,
    pub method: Method,
    /// `(k, E_k)`, increasing in both.
    pub eigenvalues: Vec<(i64, f64)>,
    pub window: EnergyWindow,
}

impl SpectralResult {
    pub fn energies(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|e| e.1).collect()
    }

    pub fn get(&self, k: i64) -> Option<f64> {
        self.eigenvalues.iter().find(|e| e.0 == k).map(|e| e.1)
    }
}

/// Nearest index on the ladder `σ(E) = kπh`.
pub fn ladder_index(p: &Potential, e: f64, h: f64) -> Result<i64> {
    Ok((p.sigma(e, SIGMA_TOL)? / (PI * h)).round() as i64)
}

/// Roots of `σ(E) = kπh` inside the window.
pub fn bs_leading(p: &Potential, win: &EnergyWindow, h: f64) -> Result<SpectralResult> {
    let s_lo = p.sigma(win.e_min, SIGMA_TOL)?;
    let s_hi = p.sigma(win.e_max, SIGMA_TOL)?;
    let k_lo = (s_lo / (PI * h)).ceil() as i64;
    let k_hi = (s_hi / (PI * h)).floor() as i64;
    let eigenvalues = (k_lo..=k_hi)
        .into_par_iter()
        .map(|k| {
            let target = k as f64 * PI * h;
            let e = brent(|e| p.sigma(e, SIGMA_TOL).map(|s| s - target), win.e_min, win.e_max, 1e-15)?;
            Ok((k, e))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SpectralResult { h, method: Method::BsLeading, eigenvalues, window: *win })
}

/// `F(E) = M₁₂`, the first component of `M (0, 1)ᵀ`.
pub fn quantization_function(p: &Potential, e: f64, h: f64, cfg: &MatchConfig) -> Result<f64> {
    Ok(connect(p, e, h, cfg)?.entries[0][1])
}

/// Scan spacing `πh / (2 σ′(e_max))`.
pub fn scan_spacing(p: &Potential, win: &EnergyWindow, h: f64) -> Result<f64> {
    Ok(PI * h / (2.0 * p.sigma_prime(win.e_max, 1e-12)?))
}

/// Sign changes of `f` on a uniform scan of the window, refined by Brent.
/// Cells that the ladder says may hold two roots trigger one refinement.
pub fn scan_roots<F>(p: &Potential, win: &EnergyWindow, h: f64, f: F, xtol: f64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let base = scan_spacing(p, win, h)?;
    let width = win.e_max - win.e_min;
    for refine in 0..2 {
        let cells = ((width / base).ceil() as usize).max(1) << refine;
        let grid: Vec<f64> = (0..=cells).map(|i| win.e_min + width * i as f64 / cells as f64).collect();
        let ladder: Vec<f64> = grid.par_iter().map(|&e| p.sigma(e, SIGMA_TOL).map(|s| s / (PI * h))).collect::<Result<_>>()?;
        let crowded = ladder.windows(2).position(|w| w[1].floor() - w[0].floor() >= 2.0);
        if let Some(i) = crowded {
            if refine == 0 {
                continue;
            }
            return Err(Error::BracketLost(grid[i]));
        }
        let values: Vec<f64> = grid.par_iter().map(|&e| f(e)).collect::<Result<_>>()?;
        let brackets: Vec<(f64, f64)> = (0..cells)
            .filter(|&i| values[i] == 0.0 || values[i].signum() != values[i + 1].signum() && values[i + 1] != 0.0)
            .map(|i| (grid[i], grid[i + 1]))
            .collect();
        let mut roots = brackets
            .par_iter()
            .map(|&(a, b)| brent(&f, a, b, xtol))
            .collect::<Result<Vec<f64>>>()?;
        roots.sort_by(f64::total_cmp);
        roots.dedup_by(|a, b| (*a - *b).abs() < 10.0 * xtol);
        return Ok(roots);
    }
    unreachable!("the second pass always returns")
}

fn label(p: &Potential, h: f64, roots: Vec<f64>) -> Result<Vec<(i64, f64)>> {
    roots.into_iter().map(|e| Ok((ladder_index(p, e, h)?, e))).collect()
}

/// Roots of the quantization function, labelled by the nearest ladder index.
pub fn eigenvalues_matched(p: &Potential, win: &EnergyWindow, h: f64, cfg: &MatchConfig) -> Result<SpectralResult> {
    let roots = scan_roots(p, win, h, |e| quantization_function(p, e, h, cfg), 1e-11)?;
    Ok(SpectralResult { h, method: Method::Matched, eigenvalues: label(p, h, roots)?, window: *win })
}

/// Eigenvalues from the shooting oracle, labelled like the matched ones.
pub fn eigenvalues_oracle(p: &Potential, win: &EnergyWindow, h: f64, cfg: &OracleConfig) -> Result<SpectralResult> {
    let roots = scan_roots(p, win, h, |e| oracle::shooting_function(p, e, h, cfg), 1e-11)?;
    Ok(SpectralResult { h, method: Method::Oracle, eigenvalues: label(p, h, roots)?, window: *win })
}

pub fn eigenvalues(
    p: &Potential,
    win: &EnergyWindow,
    h: f64,
    method: Method,
    mcfg: &MatchConfig,
    ocfg: &OracleConfig,
) -> Result<SpectralResult> {
    match method {
        Method::BsLeading => bs_leading(p, win, h),
        Method::Matched => eigenvalues_matched(p, win, h, mcfg),
        Method::Oracle => eigenvalues_oracle(p, win, h, ocfg),
    }
}

/// `max |E_k − E'_k|` over common `k`, or an alignment error when a label repeats.
pub fn max_error(a: &SpectralResult, reference: &SpectralResult) -> Result<f64> {
    for r in [a, reference] {
        if r.eigenvalues.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::AlignmentFailure(format!("repeated k in {} at h = {}", r.method, r.h)));
        }
    }
    let mut worst = 0.0f64;
    let mut any = false;
    for &(k, e) in &a.eigenvalues {
        if let Some(r) = reference.get(k) {
            worst = worst.max((e - r).abs());
            any = true;
        }
    }
    if !any {
        return Err(Error::AlignmentFailure(format!("no common k for {} at h = {}", a.method, a.h)));
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyRow {
    pub h: f64,
    pub method: Method,
    pub max_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodSlope {
    pub method: Method,
    /// `None` when every error sits at the round-off floor.
    pub slope: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyReport {
    pub rows: Vec<StudyRow>,
    pub slopes: Vec<MethodSlope>,
    pub results: Vec<SpectralResult>,
    /// Alignment problems, reported rather than raised.
    pub warnings: Vec<String>,
}

impl StudyReport {
    pub fn slope(&self, method: Method) -> Option<f64> {
        self.slopes.iter().find(|s| s.method == method).and_then(|s| s.slope)
    }
}

/// Errors below this are treated as the round-off floor.
pub const ERROR_FLOOR: f64 = 1e-11;

/// Errors of each method against the oracle on every `h`, with log-log slopes.
pub fn convergence_study(
    p: &Potential,
    win: &EnergyWindow,
    h_grid: &[f64],
    methods: &[Method],
    mcfg: &MatchConfig,
    ocfg: &OracleConfig,
) -> Result<StudyReport> {
    let mut rows = Vec::new();
    let mut results = Vec::new();
    let mut warnings = Vec::new();
    for &h in h_grid {
        let reference = eigenvalues_oracle(p, win, h, ocfg)?;
        for &m in methods.iter().filter(|m| **m != Method::Oracle) {
            let r = eigenvalues(p, win, h, m, mcfg, ocfg)?;
            match max_error(&r, &reference) {
                Ok(err) => rows.push(StudyRow { h, method: m, max_err: err }),
                Err(e) => warnings.push(e.to_string()),
            }
            results.push(r);
        }
        results.push(reference);
    }
    let mut slopes = Vec::new();
    for &m in methods.iter().filter(|m| **m != Method::Oracle) {
        let pts: Vec<&StudyRow> = rows.iter().filter(|r| r.method == m).collect();
        let above: Vec<&&StudyRow> = pts.iter().filter(|r| r.max_err > ERROR_FLOOR).collect();
        let slope = if above.len() >= 2 {
            let hs: Vec<f64> = above.iter().map(|r| r.h).collect();
            let es: Vec<f64> = above.iter().map(|r| r.max_err).collect();
            Some(loglog_slope(&hs, &es).0)
        } else {
            None
        };
        slopes.push(MethodSlope { method: m, slope });
    }
    Ok(StudyReport { rows, slopes, results, warnings })
}
