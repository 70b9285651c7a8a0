use std::f64::consts::PI;

use num_complex::Complex64;
use proptest::prelude::*;

use swkb_core::interior::{picard_differences, operator_norm, solve_basis};
use swkb_core::matching::connect;
use swkb_core::oracle::transfer_matrix;
use swkb_core::roots::loglog_slope;
use swkb_core::spectral::{
    bs_leading, eigenvalues_matched, eigenvalues_oracle, max_error, quantization_function, scan_spacing,
};
use swkb_core::{build_quasimode, EnergyWindow, InteriorConfig, MatchConfig, OracleConfig, Potential, QuasimodeOptions, Sign, Weight};

fn tilted(gamma: f64) -> Potential {
    Potential::new(gamma, 1.0, Weight::Polynomial(vec![1.0, 0.5])).unwrap()
}

fn linear() -> Potential {
    Potential::new(1.0, 1.0, Weight::Constant(1.0)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gap_holds_across_window(gamma in prop::sample::select(vec![0.5, 1.0, 1.5]), x in 0.0..=1.0f64, t in 0.0..=1.0f64) {
        let p = tilted(gamma);
        let win = p.validate(&EnergyWindow::new(2.0, 3.0).unwrap(), 2048).unwrap();
        let e = 2.0 + t;
        prop_assert!(e - p.v_at(x).unwrap() >= win.delta - 1e-12);
    }

    #[test]
    fn action_increases_with_energy(gamma in prop::sample::select(vec![0.5, 1.0, 1.5]), a in 1.6..3.0f64, d in 1e-3..0.5f64) {
        let p = tilted(gamma);
        prop_assert!(p.sigma(a, 1e-12).unwrap() < p.sigma(a + d, 1e-12).unwrap());
    }

    #[test]
    fn plus_and_minus_modes_are_conjugate(x in 0.01..1.0f64, h in 1e-3..1e-1f64) {
        let q = build_quasimode(&tilted(0.5), 2.5, 3, 0.005, &QuasimodeOptions::default()).unwrap();
        let up = q.evaluate(Sign::Plus, h, x).unwrap();
        let um = q.evaluate(Sign::Minus, h, x).unwrap();
        prop_assert!((up.value.conj() - um.value).norm() <= 1e-14 * up.value.norm().max(1.0));
        prop_assert!((up.h_derivative.conj() - um.h_derivative).norm() <= 1e-14 * up.h_derivative.norm().max(1.0));
    }
}

#[test]
fn t_correction_scales_like_gamma_plus_one() {
    let xs = [1e-2, 1e-3, 1e-4, 1e-5];
    for gamma in [0.5, 1.0, 1.5] {
        let p = tilted(gamma);
        let t: Vec<f64> = xs.iter().map(|&x| p.t_correction(2.5, x, 1e-14).unwrap().abs()).collect();
        let slope = loglog_slope(&xs, &t).0;
        assert!((slope - (gamma + 1.0)).abs() <= 0.1, "γ={gamma}: {slope}");
    }
}

#[test]
fn graded_and_plain_quadrature_agree_for_gamma_at_least_one() {
    for gamma in [1.0, 1.5] {
        let p = tilted(gamma);
        let a = p.sigma_with_grading(2.5, 1e-12, 1).unwrap();
        let b = p.sigma_with_grading(2.5, 1e-12, 3).unwrap();
        assert!((a - b).abs() <= 1e-11, "γ={gamma}: {a} {b}");
    }
}

#[test]
fn amplitudes_vanish_at_b_and_stay_bounded() {
    let p = tilted(1.5);
    let n = 3;
    let q = build_quasimode(&p, 2.5, n, 1e-6, &QuasimodeOptions::default()).unwrap();
    let grid: Vec<f64> = (0..=60).map(|i| 1e-6 * 1e6f64.powf(i as f64 / 60.0)).collect();
    for k in 1..=n {
        assert!(q.amplitude(k, 0, 1.0).norm() <= 1e-12, "A_{k}(b)");
        let ratio = |x: f64| q.amplitude(k, 0, x).norm() / (1.0 + x.powf(1.5 - k as f64));
        let upper = grid.iter().map(|&x| ratio(x)).fold(0.0, f64::max);
        // extending the grid a decade further down must not blow the bound up
        let inner = grid.iter().filter(|&&x| x >= 1e-5).map(|&x| ratio(x)).fold(0.0, f64::max);
        assert!(upper.is_finite() && upper <= 10.0 * inner.max(1e-300), "k={k}: {upper} vs {inner}");
    }
}

#[test]
fn interior_wronskian_is_constant() {
    for gamma in [0.5, 1.0, 1.5] {
        let p = tilted(gamma);
        let cfg = InteriorConfig::new(&p, 2.5, 1e-2, None).unwrap();
        let (plus, minus) = solve_basis(&p, &cfg).unwrap();
        let w0 = Complex64::new(0.0, -2.0);
        for i in (0..plus.v.len()).step_by(97) {
            let w = plus.v[i] * minus.v_dot[i] - plus.v_dot[i] * minus.v[i];
            assert!((w / w0 - 1.0).norm() <= 1e-8, "γ={gamma}, i={i}: {w}");
        }
    }
}

#[test]
fn picard_ratio_bounded_by_norm() {
    let p = tilted(0.5);
    for h in [1e-1, 1e-2, 1e-3] {
        let cfg = InteriorConfig::new(&p, 2.5, h, None).unwrap();
        let norm = operator_norm(&p, &cfg);
        let d = picard_differences(&p, &cfg, 6);
        for w in d.windows(2) {
            assert!(w[1] <= 1.5 * norm * w[0], "h={h}: {} > 1.5·{norm}·{}", w[1], w[0]);
        }
    }
}

#[test]
fn transfer_matrix_agrees_with_oracle() {
    let cfg = MatchConfig::default();
    for gamma in [0.5, 1.0, 1.5] {
        let p = tilted(gamma);
        for h in [1e-1, 1e-2] {
            let m = connect(&p, 2.5, h, &cfg).unwrap();
            let o = transfer_matrix(&p, 2.5, h, &OracleConfig::default()).unwrap();
            let mut d = 0.0f64;
            for r in 0..2 {
                for c in 0..2 {
                    d = d.max((m.entries[r][c] - o[r][c]).abs());
                }
            }
            assert!(d <= 100.0 * m.error_budget, "γ={gamma}, h={h}: {d:.2e} vs budget {:.2e}", m.error_budget);
            assert!(m.imag_defect <= 1e-6 * m.norm());
        }
    }
}

#[test]
fn one_sign_change_per_matched_eigenvalue() {
    let p = linear();
    let win = EnergyWindow::new(2.0, 2.5).unwrap();
    let h = 1e-2;
    let cfg = MatchConfig::default();
    let r = eigenvalues_matched(&p, &win, h, &cfg).unwrap();
    let step = scan_spacing(&p, &win, h).unwrap();
    let cells = ((win.e_max - win.e_min) / step).ceil() as usize;
    let grid: Vec<f64> = (0..=cells).map(|i| win.e_min + (win.e_max - win.e_min) * i as f64 / cells as f64).collect();
    let f: Vec<f64> = grid.iter().map(|&e| quantization_function(&p, e, h, &cfg).unwrap()).collect();
    for (k, &(_, e)) in r.eigenvalues.iter().enumerate() {
        let i = grid.partition_point(|&g| g <= e).min(cells) - 1;
        assert!(f[i] * f[i + 1] <= 0.0, "eigenvalue {k} not in a sign-change cell");
    }
    let changes = f.windows(2).filter(|w| w[0] * w[1] < 0.0).count();
    assert_eq!(changes, r.eigenvalues.len());
    // labels strictly increase with energy
    assert!(r.eigenvalues.windows(2).all(|w| w[1].0 == w[0].0 + 1 && w[1].1 > w[0].1));
}

#[test]
fn count_scales_like_inverse_h() {
    let p = tilted(0.5);
    let win = EnergyWindow::new(2.0, 3.0).unwrap();
    let span = p.sigma(3.0, 1e-13).unwrap() - p.sigma(2.0, 1e-13).unwrap();
    for h in [3e-2, 1e-2, 3e-3, 1e-3, 3e-4] {
        let n = bs_leading(&p, &win, h).unwrap().eigenvalues.len() as f64;
        assert!((n - span / (PI * h)).abs() <= 1.0, "h={h}: {n}");
    }
}

#[test]
fn matched_and_leading_differ_at_the_leading_rate() {
    let p = tilted(1.5);
    let win = EnergyWindow::new(2.0, 3.0).unwrap();
    let hs = [2e-2, 1e-2, 5e-3];
    let d: Vec<f64> = hs
        .iter()
        .map(|&h| {
            let m = eigenvalues_matched(&p, &win, h, &MatchConfig::default()).unwrap();
            max_error(&bs_leading(&p, &win, h).unwrap(), &m).unwrap()
        })
        .collect();
    let slope = loglog_slope(&hs, &d).0;
    assert!((slope - 2.0).abs() <= 0.2, "{slope}: {d:?}");
}

#[test]
fn oracle_self_convergence() {
    let p = linear();
    let win = EnergyWindow::new(2.0, 2.3).unwrap();
    let h = 1e-2;
    let rtol = 1e-9;
    let coarse = OracleConfig { rtol, atol: 1e-2 * rtol, ..OracleConfig::default() };
    let fine = OracleConfig { rtol: 0.5 * rtol, atol: 0.5e-2 * rtol, ..OracleConfig::default() };
    let a = eigenvalues_oracle(&p, &win, h, &coarse).unwrap();
    let b = eigenvalues_oracle(&p, &win, h, &fine).unwrap();
    let d = max_error(&a, &b).unwrap();
    assert!(d <= 10.0 * rtol, "{d:.2e}");
}
