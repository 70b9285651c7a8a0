use criterion::{black_box, criterion_group, criterion_main, Criterion};

use swkb_core::interior::solve_basis;
use swkb_core::oracle::shooting_function;
use swkb_core::{build_quasimode, connect, InteriorConfig, MatchConfig, OracleConfig, Potential, QuasimodeOptions, Weight};

fn tilted(gamma: f64) -> Potential {
    Potential::new(gamma, 1.0, Weight::Polynomial(vec![1.0, 0.5])).unwrap()
}

fn quasimode(c: &mut Criterion) {
    let mut g = c.benchmark_group("quasimode");
    for gamma in [0.5, 1.0, 1.5] {
        let p = tilted(gamma);
        g.bench_function(format!("gamma={gamma}"), |b| {
            b.iter(|| build_quasimode(&p, black_box(2.5), 4, 5e-3, &QuasimodeOptions::default()).unwrap())
        });
    }
    g.finish();
}

fn interior(c: &mut Criterion) {
    let p = tilted(0.5);
    let mut g = c.benchmark_group("interior");
    for h in [1e-2, 1e-3] {
        let cfg = InteriorConfig::new(&p, 2.5, h, None).unwrap();
        g.bench_function(format!("h={h:e}"), |b| b.iter(|| solve_basis(&p, black_box(&cfg)).unwrap()));
    }
    g.finish();
}

fn transfer(c: &mut Criterion) {
    let cfg = MatchConfig::default();
    let mut g = c.benchmark_group("connect");
    g.sample_size(20);
    for gamma in [0.5, 1.0] {
        let p = tilted(gamma);
        g.bench_function(format!("gamma={gamma},h=1e-2"), |b| b.iter(|| connect(&p, black_box(2.5), 1e-2, &cfg).unwrap()));
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let cfg = OracleConfig::default();
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    for gamma in [0.5, 1.5] {
        let p = tilted(gamma);
        g.bench_function(format!("gamma={gamma},h=1e-2"), |b| {
            b.iter(|| shooting_function(&p, black_box(2.5), 1e-2, &cfg).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, quasimode, interior, transfer, oracle);
criterion_main!(benches);
