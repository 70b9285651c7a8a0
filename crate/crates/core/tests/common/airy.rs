//! Airy functions on the negative axis, independent of the library.
//!
//! Large |z| uses the oscillatory asymptotic expansion; small |z| the
//! Maclaurin series. The two are cross-checked in the tests below.

use std::f64::consts::PI;

const AI0: f64 = 0.355_028_053_887_817_24;
// −Ai′(0)
const AIP0: f64 = 0.258_819_403_792_806_8;

/// `(Ai(z), Bi(z))` by the Maclaurin series; usable for `|z| ≲ 10`.
pub fn maclaurin(z: f64) -> (f64, f64) {
    let z3 = z * z * z;
    // f = Σ 3^k (1/3)_k z^{3k}/(3k)!, g = Σ 3^k (2/3)_k z^{3k+1}/(3k+1)!
    let (mut f, mut g) = (1.0, z);
    let (mut tf, mut tg) = (1.0, z);
    for k in 1..200 {
        let k = k as f64;
        tf *= z3 / ((3.0 * k - 1.0) * 3.0 * k);
        tg *= z3 / (3.0 * k * (3.0 * k + 1.0));
        f += tf;
        g += tg;
        if tf.abs() + tg.abs() < 1e-18 * (f.abs() + g.abs()) {
            break;
        }
    }
    (AI0 * f - AIP0 * g, 3f64.sqrt() * (AI0 * f + AIP0 * g))
}

/// `(Ai(−x), Bi(−x))` for large `x > 0` from the asymptotic expansion,
/// truncated at the smallest term.
pub fn asymptotic_negative(x: f64) -> (f64, f64) {
    let xi = 2.0 / 3.0 * x.powf(1.5);
    let (mut p, mut q) = (1.0, 0.0);
    let mut u = 1.0f64;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        u *= (6.0 * kf - 5.0) * (6.0 * kf - 3.0) * (6.0 * kf - 1.0) / ((2.0 * kf - 1.0) * 216.0 * kf);
        let term = u / xi.powi(k);
        if term.abs() >= last {
            break;
        }
        last = term.abs();
        // P gets even k with sign (−1)^{k/2}; Q gets odd k with sign (−1)^{(k−1)/2}
        let sign = if (k / 2) % 2 == 0 { 1.0 } else { -1.0 };
        if k % 2 == 0 {
            p += sign * term;
        } else {
            q += sign * term;
        }
    }
    let amp = 1.0 / (PI.sqrt() * x.powf(0.25));
    let th = xi + PI / 4.0;
    let (s, c) = th.sin_cos();
    (amp * (s * p - c * q), amp * (c * p + s * q))
}

/// `(Ai(z), Bi(z))` for `z ≤ 0`.
pub fn airy_negative(z: f64) -> (f64, f64) {
    assert!(z <= 0.0);
    if z > -8.0 {
        maclaurin(z)
    } else {
        asymptotic_negative(-z)
    }
}

/// Dirichlet eigenvalues of `−h²u″ + xu = Eu` on `[0, 1]` inside `[e_min, e_max]`:
/// roots of `Ai(ζ₀)Bi(ζ₁) − Ai(ζ₁)Bi(ζ₀)` with `ζᵢ = h^{−2/3}(xᵢ − E)`.
/// Requires `e_min > 1` so both arguments are negative.
pub fn linear_eigenvalues(h: f64, e_min: f64, e_max: f64) -> Vec<f64> {
    assert!(e_min > 1.0);
    let s = h.powf(-2.0 / 3.0);
    let f = |e: f64| {
        let (a0, b0) = airy_negative(-s * e);
        let (a1, b1) = airy_negative(s * (1.0 - e));
        a0 * b1 - a1 * b0
    };
    // roots are ~πh/σ′ apart with σ′ ≤ 1 / √(E − 1) ≤ 1 here
    let step = 0.05 * h;
    let n = ((e_max - e_min) / step).ceil() as usize;
    let mut roots = Vec::new();
    let mut a = e_min;
    let mut fa = f(a);
    for i in 1..=n {
        let b = (e_min + i as f64 * step).min(e_max);
        let fb = f(b);
        if fa == 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            while hi - lo > 1e-14 * hi {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if fm * flo > 0.0 {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    roots
}
