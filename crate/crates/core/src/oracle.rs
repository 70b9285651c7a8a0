//! Direct integration of `h²φ″ + (E − V)φ = 0` as the system
//! `d/dx (u, w) = (w/h, −(E−V)u/h)` with `w = h u′`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ode::{Dopri5, Stats};
use crate::potential::Potential;
use crate::quadrature::grading_exponent;
use crate::wkb::CauchyDatum;

/// Smallest semiclassical parameter accepted.
pub const MIN_H: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    pub rtol: f64,
    pub atol: f64,
    /// Step bound as a fraction of the local wavelength `h / √(E − V)`.
    pub max_step_fraction: f64,
    /// `x = s^p` near 0; `None` uses `ceil(2/γ)` for `γ < 1` and 1 otherwise.
    pub grading_exponent: Option<u32>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { rtol: 1e-12, atol: 1e-14, max_step_fraction: 0.2, grading_exponent: None }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rtol > 0.0 && self.atol > 0.0) {
            return Err(Error::InvalidParameter("oracle tolerances must be positive".into()));
        }
        if !(self.max_step_fraction > 0.0 && self.max_step_fraction <= 0.2) {
            return Err(Error::InvalidParameter(format!(
                "max_step_fraction {} not in (0, 0.2]",
                self.max_step_fraction
            )));
        }
        Ok(())
    }

    fn grading(&self, gamma: f64) -> u32 {
        self.grading_exponent.unwrap_or(if gamma < 1.0 { grading_exponent(gamma) } else { 1 })
    }
}

/// Carries a Cauchy datum from `from` to `to`; also returns step counts.
pub fn propagate_with_stats(
    p: &Potential,
    e: f64,
    h: f64,
    from: f64,
    to: f64,
    datum: CauchyDatum,
    cfg: &OracleConfig,
) -> Result<(CauchyDatum, Stats)> {
    cfg.validate()?;
    if h < MIN_H {
        return Err(Error::InvalidParameter(format!("h = {h} is below {MIN_H}")));
    }
    let b = p.b();
    for x in [from, to] {
        if !(0.0..=b).contains(&x) {
            return Err(Error::OutOfDomain { x, lo: 0.0, hi: b });
        }
    }
    let pg = cfg.grading(p.gamma()) as i32;
    let inv = 1.0 / pg as f64;
    let x_of = |s: f64| s.powi(pg);
    let jac = |s: f64| if pg == 1 { 1.0 } else { pg as f64 * s.powi(pg - 1) };
    let rhs = |s: f64, y: &[f64; 4]| -> [f64; 4] {
        let x = x_of(s.max(0.0)).min(b);
        let q = e - p.v(x);
        let j = jac(s.max(0.0)) / h;
        [j * y[2], j * y[3], -j * q * y[0], -j * q * y[1]]
    };
    let frac = cfg.max_step_fraction;
    let cap = |s: f64| {
        let x = x_of(s.max(0.0)).min(b);
        let q = (e - p.v(x)).max(f64::MIN_POSITIVE);
        let j = jac(s.max(0.0));
        if j == 0.0 {
            f64::INFINITY
        } else {
            frac * h / (q.sqrt() * j)
        }
    };
    let ode = Dopri5 { rtol: cfg.rtol, atol: cfg.atol, ..Dopri5::default() };
    let y0 = [datum.value.re, datum.value.im, datum.h_derivative.re, datum.h_derivative.im];
    let (y, stats) = ode.solve(rhs, from.powf(inv), to.powf(inv), y0, cap)?;
    let out = CauchyDatum {
        value: Complex64::new(y[0], y[1]),
        h_derivative: Complex64::new(y[2], y[3]),
        at: to,
        h,
    };
    Ok((out, stats))
}

pub fn propagate(
    p: &Potential,
    e: f64,
    h: f64,
    from: f64,
    to: f64,
    datum: CauchyDatum,
    cfg: &OracleConfig,
) -> Result<CauchyDatum> {
    propagate_with_stats(p, e, h, from, to, datum, cfg).map(|r| r.0)
}

/// `G(E)`: value at 0 of the solution with datum `(0, 1)` at `b`.
pub fn shooting_function(p: &Potential, e: f64, h: f64, cfg: &OracleConfig) -> Result<f64> {
    let b = p.b();
    let d = CauchyDatum { value: 0.0.into(), h_derivative: 1.0.into(), at: b, h };
    Ok(propagate(p, e, h, b, 0.0, d, cfg)?.value.re)
}

/// Normalized transfer matrix from `b` to 0 by direct propagation of both
/// basis data, in the same normalization as the matched one.
pub fn transfer_matrix(p: &Potential, e: f64, h: f64, cfg: &OracleConfig) -> Result<[[f64; 2]; 2]> {
    let b = p.b();
    let qb = e - p.v(b);
    let n0 = [e.powf(0.25), e.powf(-0.25)];
    let starts = [(qb.powf(-0.25), 0.0), (0.0, qb.powf(0.25))];
    let mut m = [[0.0; 2]; 2];
    for (c, &(u, w)) in starts.iter().enumerate() {
        let d = CauchyDatum { value: u.into(), h_derivative: w.into(), at: b, h };
        let out = propagate(p, e, h, b, 0.0, d, cfg)?;
        m[0][c] = n0[0] * out.value.re;
        m[1][c] = n0[1] * out.h_derivative.re;
    }
    Ok(m)
}
