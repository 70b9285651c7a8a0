//! Generalized Taylor expansions at 0 over the exponent lattice `{m·gamma + j}`.
//!
//! Exponents are kept as integer pairs `(m, j)` so that exponent-set identities
//! are exact. When `gamma = p/q` is rational, pairs are reduced to a canonical
//! representative with `0 <= m < q`, so equal real exponents share one term.
//!
//! Terms may also carry a power of `ln x`. Integrating `x^{-1}` produces such
//! terms, which happens in the WKB amplitudes whenever `2·gamma` is an integer.
//! [`Expansion::antiderivative_from_b`] refuses to create them;
//! [`Expansion::antiderivative_from_b_with_logs`] allows it.

use std::cmp::Ordering;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::potential::Potential;

/// Relative threshold below which coefficients are pruned after each operation.
pub const PRUNE_RELATIVE: f64 = 1e-15;
const MAX_DENOMINATOR: i64 = 64;

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// The exponent `gamma`, with its rational form when one with a small
/// denominator matches to round-off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gamma {
    value: f64,
    ratio: Option<(i64, i64)>,
}

impl Gamma {
    pub fn new(value: f64) -> Self {
        let ratio = (1..=MAX_DENOMINATOR).find_map(|q| {
            let p = (value * q as f64).round();
            if (value * q as f64 - p).abs() <= 1e-12 * q as f64 && p > 0.0 {
                let p = p as i64;
                let g = gcd(p, q);
                Some((p / g, q / g))
            } else {
                None
            }
        });
        Self { value, ratio }
    }

    /// Forces the irrational treatment: pairs are never identified.
    pub fn generic(value: f64) -> Self {
        Self { value, ratio: None }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn ratio(&self) -> Option<(i64, i64)> {
        self.ratio
    }

    /// Canonical representative of `m·gamma + j`.
    pub fn canonical(&self, e: LatticeExponent) -> LatticeExponent {
        match self.ratio {
            Some((p, q)) => {
                let m = e.m as i64;
                let shift = m / q;
                LatticeExponent { m: (m % q) as u32, j: e.j + (shift * p) as i32 }
            }
            None => e,
        }
    }

    pub fn exponent_value(&self, e: LatticeExponent) -> f64 {
        match self.ratio {
            Some((p, q)) => (e.m as i64 * p + e.j as i64 * q) as f64 / q as f64,
            None => e.m as f64 * self.value + e.j as f64,
        }
    }

    /// Whether `value(e) + shift ∈ {m·gamma + n : m >= min_m, n >= 0}`.
    pub fn in_lattice_cone(&self, e: LatticeExponent, shift: i32, min_m: u32) -> bool {
        let e = self.canonical(e);
        match self.ratio {
            None => e.m >= min_m && e.j + shift >= 0,
            Some((p, q)) => {
                // candidates m = e.m + t q; take the smallest m >= min_m
                let mut m = e.m as i64;
                let mut n = (e.j + shift) as i64;
                while m < min_m as i64 {
                    m += q;
                    n -= p;
                }
                n >= 0
            }
        }
    }
}

/// An exponent `m·gamma + j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeExponent {
    pub m: u32,
    pub j: i32,
}

impl LatticeExponent {
    pub const ZERO: LatticeExponent = LatticeExponent { m: 0, j: 0 };

    pub fn new(m: u32, j: i32) -> Self {
        Self { m, j }
    }

    fn add(self, other: Self) -> Self {
        Self { m: self.m + other.m, j: self.j + other.j }
    }

    fn shift(self, dj: i32) -> Self {
        Self { m: self.m, j: self.j + dj }
    }
}

/// One term `coeff · x^{m gamma + j} · (ln x)^log`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub exponent: LatticeExponent,
    pub log: u32,
    pub coeff: f64,
}

/// A truncated generalized Taylor expansion: the stored terms plus an
/// `O(x^order)` remainder.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    gamma: Gamma,
    terms: Vec<Term>,
    order: f64,
}

/// Default truncation order `6 + 4·gamma`.
pub fn default_order(gamma: f64) -> f64 {
    6.0 + 4.0 * gamma
}

impl Expansion {
    pub fn zero(gamma: Gamma, order: f64) -> Self {
        Self { gamma, terms: Vec::new(), order }
    }

    pub fn constant(gamma: Gamma, c: f64, order: f64) -> Self {
        Self::monomial(gamma, LatticeExponent::ZERO, c, order)
    }

    pub fn monomial(gamma: Gamma, e: LatticeExponent, c: f64, order: f64) -> Self {
        Self::from_terms(gamma, vec![Term { exponent: e, log: 0, coeff: c }], order)
    }

    /// Builds an expansion from arbitrary terms: canonicalises, merges
    /// duplicates, truncates and prunes.
    pub fn from_terms(gamma: Gamma, terms: Vec<Term>, order: f64) -> Self {
        let mut out = Self { gamma, terms, order };
        out.normalize();
        out
    }

    pub fn gamma(&self) -> Gamma {
        self.gamma
    }

    pub fn order(&self) -> f64 {
        self.order
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn value_of(&self, e: LatticeExponent) -> f64 {
        self.gamma.exponent_value(e)
    }

    /// Smallest exponent carried, or the truncation order for the zero expansion.
    pub fn lowest(&self) -> f64 {
        self.terms.first().map(|t| self.value_of(t.exponent)).unwrap_or(self.order)
    }

    /// Coefficient of `x^e (ln x)^log` (0 if absent).
    pub fn coefficient(&self, e: LatticeExponent, log: u32) -> f64 {
        let e = self.gamma.canonical(e);
        self.terms
            .iter()
            .find(|t| t.exponent == e && t.log == log)
            .map(|t| t.coeff)
            .unwrap_or(0.0)
    }

    /// Distinct canonical exponents present (ignoring log powers), ascending.
    pub fn exponent_set(&self) -> Vec<LatticeExponent> {
        let mut out: Vec<LatticeExponent> = Vec::new();
        for t in &self.terms {
            if out.last() != Some(&t.exponent) && !out.contains(&t.exponent) {
                out.push(t.exponent);
            }
        }
        out
    }

    pub fn has_log_terms(&self) -> bool {
        self.terms.iter().any(|t| t.log > 0)
    }

    fn cmp_terms(&self, a: &Term, b: &Term) -> Ordering {
        self.value_of(a.exponent)
            .total_cmp(&self.value_of(b.exponent))
            .then(a.exponent.cmp(&b.exponent))
            .then(b.log.cmp(&a.log))
    }

    fn normalize(&mut self) {
        let gamma = self.gamma;
        let order = self.order;
        for t in &mut self.terms {
            t.exponent = gamma.canonical(t.exponent);
        }
        self.terms.retain(|t| gamma.exponent_value(t.exponent) < order - 1e-12);
        let mut terms = std::mem::take(&mut self.terms);
        terms.sort_by(|a, b| self.cmp_terms(a, b));
        let mut merged: Vec<Term> = Vec::with_capacity(terms.len());
        for t in terms {
            match merged.last_mut() {
                Some(last) if last.exponent == t.exponent && last.log == t.log => last.coeff += t.coeff,
                _ => merged.push(t),
            }
        }
        let max = merged.iter().map(|t| t.coeff.abs()).fold(0.0, f64::max);
        merged.retain(|t| t.coeff != 0.0 && t.coeff.abs() >= PRUNE_RELATIVE * max);
        self.terms = merged;
    }

    fn check_gamma(&self, other: &Self) -> Result<()> {
        if self.gamma.value != other.gamma.value {
            return Err(Error::GammaMismatch(self.gamma.value, other.gamma.value));
        }
        Ok(())
    }

    /// `λ·u + μ·v`; the result is truncated at the smaller order.
    pub fn add(u: &Self, v: &Self, lambda: f64, mu: f64) -> Result<Self> {
        u.check_gamma(v)?;
        let terms = u
            .terms
            .iter()
            .map(|t| Term { coeff: lambda * t.coeff, ..*t })
            .chain(v.terms.iter().map(|t| Term { coeff: mu * t.coeff, ..*t }))
            .collect();
        Ok(Self::from_terms(u.gamma, terms, u.order.min(v.order)))
    }

    /// Same terms with a different truncation order.
    pub fn with_order(&self, order: f64) -> Self {
        Self::from_terms(self.gamma, self.terms.clone(), order)
    }

    pub fn scale(&self, c: f64) -> Self {
        let terms = self.terms.iter().map(|t| Term { coeff: c * t.coeff, ..*t }).collect();
        Self::from_terms(self.gamma, terms, self.order)
    }

    /// Cauchy product over the lattice. The remainder order is
    /// `min(ord_u, ord_v, ord_u + low_v, ord_v + low_u)`.
    pub fn mul(u: &Self, v: &Self) -> Result<Self> {
        u.check_gamma(v)?;
        let order = u
            .order
            .min(v.order)
            .min(u.order + v.lowest())
            .min(v.order + u.lowest());
        let mut terms = Vec::with_capacity(u.terms.len() * v.terms.len());
        for a in &u.terms {
            let va = u.value_of(a.exponent);
            for b in &v.terms {
                if va + v.value_of(b.exponent) >= order {
                    break;
                }
                terms.push(Term {
                    exponent: a.exponent.add(b.exponent),
                    log: a.log + b.log,
                    coeff: a.coeff * b.coeff,
                });
            }
        }
        Ok(Self::from_terms(u.gamma, terms, order))
    }

    /// Series of `(E - x^gamma W(x))^alpha` with `W` replaced by its Taylor
    /// polynomial: `E^alpha Σ_m C(alpha, m) (-x^gamma W / E)^m`.
    pub fn compose_power(p: &Potential, e: f64, alpha: f64, order: f64) -> Result<Self> {
        if !(e > 0.0) {
            return Err(Error::NonPositiveEnergy(e));
        }
        let gamma = Gamma::new(p.gamma());
        let w = p.w_taylor();
        let needed = (order - p.gamma()).ceil().max(0.0) as usize;
        if w.len() < needed && w[w.len() - 1] != 0.0 {
            return Err(Error::TaylorOrderInsufficient { available: w.len(), needed });
        }
        let x_terms = w
            .iter()
            .enumerate()
            .map(|(j, c)| Term { exponent: LatticeExponent::new(1, j as i32), log: 0, coeff: -c / e })
            .collect();
        let x_series = Self::from_terms(gamma, x_terms, order);
        let mut result = Self::constant(gamma, 1.0, order);
        let mut power = Self::constant(gamma, 1.0, order);
        let mut binom = 1.0;
        let mut m = 0usize;
        loop {
            m += 1;
            power = Self::mul(&power, &x_series)?;
            if power.is_zero() {
                break;
            }
            binom *= (alpha - (m - 1) as f64) / m as f64;
            if binom == 0.0 {
                break;
            }
            result = Self::add(&result, &power, 1.0, binom)?;
        }
        Ok(result.scale(e.powf(alpha)))
    }

    /// Termwise derivative; the remainder order drops by one.
    pub fn differentiate(&self) -> Self {
        let mut terms = Vec::with_capacity(self.terms.len() * 2);
        for t in &self.terms {
            let alpha = self.value_of(t.exponent);
            let e = t.exponent.shift(-1);
            if alpha != 0.0 {
                terms.push(Term { exponent: e, log: t.log, coeff: alpha * t.coeff });
            }
            if t.log > 0 {
                terms.push(Term { exponent: e, log: t.log - 1, coeff: t.log as f64 * t.coeff });
            }
        }
        Self::from_terms(self.gamma, terms, self.order - 1.0)
    }

    /// Series of `U(x) = ∫_x^b u(y) dy`: termwise `-a x^{α+1}/(α+1)` plus the
    /// caller-supplied constant term. Fails if the exponent −1 is present.
    pub fn antiderivative_from_b(&self, constant_term: f64) -> Result<Self> {
        if self.terms.iter().any(|t| self.value_of(t.exponent) == -1.0) {
            return Err(Error::ExponentMinusOne);
        }
        Ok(self.antiderivative_from_b_with_logs(constant_term))
    }

    /// As [`Expansion::antiderivative_from_b`], but integrates `x^{-1} (ln x)^l`
    /// to `(ln x)^{l+1}/(l+1)` instead of failing.
    pub fn antiderivative_from_b_with_logs(&self, constant_term: f64) -> Self {
        let mut terms = vec![Term { exponent: LatticeExponent::ZERO, log: 0, coeff: constant_term }];
        for t in &self.terms {
            let alpha = self.value_of(t.exponent);
            if alpha == -1.0 {
                terms.push(Term {
                    exponent: LatticeExponent::ZERO,
                    log: t.log + 1,
                    coeff: -t.coeff / (t.log + 1) as f64,
                });
                continue;
            }
            // ∫ x^α L^l = x^{α+1} Σ_i (-1)^i l!/(l-i)! L^{l-i} / (α+1)^{i+1}
            let e = t.exponent.shift(1);
            let mut falling = 1.0;
            for i in 0..=t.log {
                if i > 0 {
                    falling *= (t.log - i + 1) as f64;
                }
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                terms.push(Term {
                    exponent: e,
                    log: t.log - i,
                    coeff: -t.coeff * sign * falling / (alpha + 1.0).powi(i as i32 + 1),
                });
            }
        }
        Self::from_terms(self.gamma, terms, self.order + 1.0)
    }

    /// `Σ a x^α (ln x)^l`; accurate to `O(x^order)`.
    pub fn evaluate(&self, x: f64) -> f64 {
        let lx = x.ln();
        self.terms
            .iter()
            .map(|t| {
                let v = t.coeff * x.powf(self.value_of(t.exponent));
                if t.log == 0 {
                    v
                } else {
                    v * lx.powi(t.log as i32)
                }
            })
            .sum()
    }

    /// One term per line, `m j coefficient` (plus the log power when nonzero),
    /// in ascending exponent order.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for t in &self.terms {
            if t.log == 0 {
                let _ = writeln!(s, "{} {} {:.17e}", t.exponent.m, t.exponent.j, t.coeff);
            } else {
                let _ = writeln!(s, "{} {} {:.17e} {}", t.exponent.m, t.exponent.j, t.coeff, t.log);
            }
        }
        s
    }

    /// Parses the [`Expansion::dump`] format.
    pub fn parse_dump(gamma: Gamma, order: f64, text: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let bad = || Error::ConfigParse(format!("dump line {}: {line:?}", lineno + 1));
            let fields: Vec<&str> = line.split_whitespace().collect();
            if !(3..=4).contains(&fields.len()) {
                return Err(bad());
            }
            let m = fields[0].parse().map_err(|_| bad())?;
            let j = fields[1].parse().map_err(|_| bad())?;
            let coeff = fields[2].parse().map_err(|_| bad())?;
            let log = fields.get(3).map(|f| f.parse()).transpose().map_err(|_| bad())?.unwrap_or(0);
            terms.push(Term { exponent: LatticeExponent::new(m, j), log, coeff });
        }
        Ok(Self::from_terms(gamma, terms, order))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::Weight;

    fn half() -> Gamma {
        Gamma::new(0.5)
    }

    fn poly(gamma: Gamma, pairs: &[(u32, i32, f64)], order: f64) -> Expansion {
        Expansion::from_terms(
            gamma,
            pairs
                .iter()
                .map(|&(m, j, c)| Term { exponent: LatticeExponent::new(m, j), log: 0, coeff: c })
                .collect(),
            order,
        )
    }

    #[test]
    fn rational_detection() {
        assert_eq!(Gamma::new(0.5).ratio(), Some((1, 2)));
        assert_eq!(Gamma::new(1.5).ratio(), Some((3, 2)));
        assert_eq!(Gamma::new(1.0).ratio(), Some((1, 1)));
        assert_eq!(Gamma::new(std::f64::consts::SQRT_2).ratio(), None);
    }

    #[test]
    fn add_examples() {
        let g = half();
        let u = poly(g, &[(0, 0, 1.0), (1, 0, 1.0)], 8.0);
        let v = poly(g, &[(0, 1, 1.0)], 8.0);
        let s = Expansion::add(&u, &v, 1.0, 1.0).unwrap();
        let vals: Vec<f64> = s.terms().iter().map(|t| s.value_of(t.exponent)).collect();
        assert_eq!(vals, vec![0.0, 0.5, 1.0]);
        assert!(Expansion::add(&u, &u, 1.0, -1.0).unwrap().is_zero());
        // (2,0) and (0,1) are the same exponent for gamma = 1/2
        let a = poly(g, &[(1, 0, 1.0)], 8.0);
        let b = poly(g, &[(2, 0, 1.0)], 8.0);
        let s = Expansion::add(&a, &b, 1.0, 1.0).unwrap();
        assert_eq!(s.exponent_set(), vec![LatticeExponent::new(1, 0), LatticeExponent::new(0, 1)]);
        assert_eq!(s.coefficient(LatticeExponent::new(2, 0), 0), 1.0);
    }

    #[test]
    fn gamma_mismatch() {
        let a = Expansion::constant(Gamma::new(0.5), 1.0, 4.0);
        let b = Expansion::constant(Gamma::new(1.5), 1.0, 4.0);
        assert!(matches!(Expansion::add(&a, &b, 1.0, 1.0), Err(Error::GammaMismatch(..))));
        assert!(matches!(Expansion::mul(&a, &b), Err(Error::GammaMismatch(..))));
    }

    #[test]
    fn mul_examples() {
        let g = Gamma::generic(0.7);
        let u = poly(g, &[(0, 0, 1.0), (1, 0, 1.0)], 8.0);
        let v = poly(g, &[(0, 0, 1.0), (1, 0, -1.0)], 8.0);
        let p = Expansion::mul(&u, &v).unwrap();
        assert_eq!(p, poly(g, &[(0, 0, 1.0), (2, 0, -1.0)], 8.0));
        let one = Expansion::constant(g, 1.0, 8.0);
        assert_eq!(Expansion::mul(&u, &one).unwrap(), u);
    }

    #[test]
    fn compose_power_identity_and_sqrt() {
        let p = Potential::new(0.5, 1.0, Weight::Polynomial(vec![1.0, 0.5])).unwrap();
        let s = Expansion::compose_power(&p, 2.0, 1.0, 6.0).unwrap();
        assert_eq!(s.coefficient(LatticeExponent::ZERO, 0), 2.0);
        assert_eq!(s.coefficient(LatticeExponent::new(1, 0), 0), -1.0);
        assert_eq!(s.coefficient(LatticeExponent::new(1, 1), 0), -0.5);
        assert_eq!(s.terms().len(), 3);

        let lin = Potential::new(1.0, 1.0, Weight::Constant(1.0)).unwrap();
        let r = Expansion::compose_power(&lin, 1.0, 0.5, 8.0).unwrap();
        // binomial coefficients of sqrt(1-x)
        let expected = [1.0, -0.5, -0.125, -0.0625, -0.0390625];
        for (n, c) in expected.iter().enumerate() {
            assert!((r.coefficient(LatticeExponent::new(0, n as i32), 0) - c).abs() < 1e-15);
        }
        let v = Expansion::compose_power(&lin, 2.0, 0.5, 8.0).unwrap().evaluate(0.1);
        assert!((v - 1.9f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn compose_power_inverse_pair() {
        let p = Potential::new(0.5, 1.0, Weight::Constant(1.0)).unwrap();
        let a = Expansion::compose_power(&p, 2.0, -0.25, 8.0).unwrap();
        let b = Expansion::compose_power(&p, 2.0, 0.25, 8.0).unwrap();
        let c1 = a.coefficient(LatticeExponent::new(1, 0), 0);
        assert!((c1 - 2f64.powf(-0.25) / 8.0).abs() < 1e-15);
        let prod = Expansion::mul(&a, &b).unwrap();
        for t in prod.terms() {
            if t.exponent == LatticeExponent::ZERO {
                assert!((t.coeff - 1.0).abs() < 1e-14);
            } else {
                assert!(t.coeff.abs() < 1e-12, "{t:?}");
            }
        }
    }

    #[test]
    fn differentiate_examples() {
        let g = half();
        let x_g = poly(g, &[(1, 0, 1.0)], 8.0);
        assert_eq!(x_g.differentiate(), poly(g, &[(1, -1, 0.5)], 7.0));
        assert!(Expansion::constant(g, 3.0, 8.0).differentiate().is_zero());
    }

    #[test]
    fn differentiate_matches_finite_differences() {
        let p = Potential::new(0.5, 1.0, Weight::Polynomial(vec![1.0, 0.5])).unwrap();
        let e = 2.0;
        let alpha = -0.25;
        let d = Expansion::compose_power(&p, e, alpha, 12.0).unwrap().differentiate();
        for x in [1e-2, 1e-3] {
            let f = |y: f64| (e - p.v(y)).powf(alpha);
            let s = x * 1e-4;
            let fd = (f(x - 2.0 * s) - 8.0 * f(x - s) + 8.0 * f(x + s) - f(x + 2.0 * s)) / (12.0 * s);
            let an = d.evaluate(x);
            assert!(((an - fd) / fd).abs() < 1e-6, "x={x} {an} {fd}");
        }
    }

    #[test]
    fn antiderivative_examples() {
        let g = half();
        let u = poly(g, &[(1, 0, 1.0)], 8.0);
        let big_u = u.antiderivative_from_b(0.0).unwrap();
        assert_eq!(big_u, poly(g, &[(1, 1, -2.0 / 3.0)], 9.0));
        let z = Expansion::zero(g, 8.0).antiderivative_from_b(1.5).unwrap();
        assert_eq!(z, Expansion::constant(g, 1.5, 9.0));
        let bad = poly(g, &[(0, -1, 1.0)], 8.0);
        assert_eq!(bad.antiderivative_from_b(0.0), Err(Error::ExponentMinusOne));
        let logs = bad.antiderivative_from_b_with_logs(0.0);
        assert_eq!(logs.coefficient(LatticeExponent::ZERO, 1), -1.0);
        // d/dx of the log antiderivative returns -u
        assert_eq!(logs.differentiate(), bad.scale(-1.0).with_order(8.0));
    }

    #[test]
    fn t_correction_series_matches_quadrature() {
        let p = Potential::new(0.5, 1.0, Weight::Constant(1.0)).unwrap();
        let e = 2.0;
        let order = 10.0;
        let sqrt_q = Expansion::compose_power(&p, e, 0.5, order).unwrap();
        let integrand = Expansion::add(&sqrt_q, &Expansion::constant(sqrt_q.gamma(), 1.0, order), 1.0, -e.sqrt())
            .unwrap();
        let constant = -p.t_correction(e, 1.0, 1e-15).unwrap();
        // ∫_x^b g = T(b) - T(x); the series of T(x) is constant - ∫_x^b g
        let u = integrand.antiderivative_from_b(0.0).unwrap();
        let shift = u.evaluate(1.0);
        let t_series = Expansion::add(&u, &Expansion::constant(u.gamma(), 1.0, u.order()), -1.0, shift - constant)
            .unwrap();
        let x = 1e-3;
        let quad = p.t_correction(e, x, 1e-16).unwrap();
        assert!((t_series.evaluate(x) - quad).abs() < 1e-8, "{} {}", t_series.evaluate(x), quad);
    }

    #[test]
    fn evaluate_examples() {
        let g = half();
        assert_eq!(poly(g, &[(0, 0, 1.0), (1, 0, 1.0)], 8.0).evaluate(0.25), 1.5);
        assert_eq!(Expansion::zero(g, 8.0).evaluate(0.3), 0.0);
    }

    #[test]
    fn dump_roundtrip() {
        let p = Potential::new(0.5, 1.0, Weight::Polynomial(vec![1.0, 0.5])).unwrap();
        let a = Expansion::compose_power(&p, 2.0, -0.25, 6.0).unwrap();
        let text = a.dump();
        assert!(text.lines().next().unwrap().starts_with("0 0 "));
        let back = Expansion::parse_dump(a.gamma(), a.order(), &text).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn lattice_cone_membership() {
        let g = half();
        // gamma - 1 = (1,-1) is in {m gamma + n - 1 : m >= 1}
        assert!(g.in_lattice_cone(LatticeExponent::new(1, -1), 1, 1));
        // -1 = (0,-1): needs m=2, n=0 with shift 1 -> 2*0.5 + 0 - 1 = 0 != -1
        assert!(!g.in_lattice_cone(LatticeExponent::new(0, -1), 1, 1));
        assert!(g.in_lattice_cone(LatticeExponent::new(0, 0), 1, 1));
        let irr = Gamma::generic(0.7);
        assert!(!irr.in_lattice_cone(LatticeExponent::new(0, 3), 0, 1));
    }
}
