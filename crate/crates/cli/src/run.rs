use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use swkb_core::interior::solve_basis;
use swkb_core::matching::{connect, fit_corrections};
use swkb_core::oracle::transfer_matrix;
use swkb_core::report::{Cell, Table};
use swkb_core::spectral::{self, convergence_study, Method};
use swkb_core::{EnergyWindow, Error, StudyConfig};

use crate::{Cli, Command};

pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_TOLERANCE: u8 = 2;
pub const EXIT_CONFIG: u8 = 64;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::ConfigParse(_) => EXIT_CONFIG,
            Error::NonPositiveGap { .. }
            | Error::NotIncreasing { .. }
            | Error::NonPositiveW { .. }
            | Error::InvalidPotential(_)
            | Error::InvalidWindow(_) => EXIT_VALIDATION,
            _ => EXIT_TOLERANCE,
        };
        Failure { code, message: e.to_string() }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure { code: EXIT_TOLERANCE, message: format!("{}: {e}", path.display()) }
}

struct Context {
    cfg: StudyConfig,
    window: EnergyWindow,
    hash: String,
    out: PathBuf,
}

impl Context {
    fn write(&self, name: &str, table: &Table) -> Result<(), Failure> {
        fs::create_dir_all(&self.out).map_err(|e| io_failure(&self.out, e))?;
        let path = self.out.join(name);
        fs::write(&path, table.render(&self.hash)).map_err(|e| io_failure(&path, e))?;
        println!("wrote {}", path.display());
        Ok(())
    }

    fn need_h(&self) -> Result<&[f64], Failure> {
        if self.cfg.h_list.is_empty() {
            return Err(Error::ConfigParse("study.h_list is required for this command".into()).into());
        }
        Ok(&self.cfg.h_list)
    }
}

pub fn run(cli: &Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        // a second initialisation only happens in tests; keep the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let text = fs::read_to_string(&cli.config)
        .map_err(|e| Failure { code: EXIT_CONFIG, message: format!("{}: {e}", cli.config.display()) })?;
    let cfg = StudyConfig::parse(&text)?;
    let window = cfg.potential.validate(&cfg.window, 2048)?;
    let hash = format!("{:x}", Sha256::digest(cfg.canonical.as_bytes()));
    let out = cli.out.clone().or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("."));
    let ctx = Context { cfg, window, hash, out };
    match cli.command {
        Command::Validate => validate(&ctx),
        Command::Eigenvalues => eigenvalues(&ctx),
        Command::Transfer => transfer(&ctx),
        Command::Fit => fit(&ctx),
        Command::Study => study(&ctx),
        Command::Check => check(&ctx),
    }
}

fn validate(ctx: &Context) -> Result<(), Failure> {
    let p = &ctx.cfg.potential;
    println!("delta={:?}", ctx.window.delta);
    println!("gamma={:?}", p.gamma());
    println!("b={:?}", p.b());
    println!("admissible=true");
    Ok(())
}

fn eigenvalues(ctx: &Context) -> Result<(), Failure> {
    let c = &ctx.cfg;
    let mut spectral_table = Table::new(&["h", "method", "k", "E"]);
    let mut oracle_table = Table::new(&["h", "method", "k", "E"]);
    for &h in ctx.need_h()? {
        for &m in c.methods.iter().filter(|m| **m != Method::Oracle) {
            let r = spectral::eigenvalues(&c.potential, &ctx.window, h, m, &c.matching, &c.oracle)?;
            for (k, e) in r.eigenvalues {
                spectral_table.push(vec![h.into(), m.name().into(), k.into(), e.into()]);
            }
        }
        let r = spectral::eigenvalues_oracle(&c.potential, &ctx.window, h, &c.oracle)?;
        for (k, e) in r.eigenvalues {
            oracle_table.push(vec![h.into(), Method::Oracle.name().into(), k.into(), e.into()]);
        }
    }
    ctx.write("spectral.csv", &spectral_table)?;
    ctx.write("oracle.csv", &oracle_table)
}

fn transfer(ctx: &Context) -> Result<(), Failure> {
    let c = &ctx.cfg;
    let jobs: Vec<(f64, f64)> = ctx.need_h()?.iter().flat_map(|&h| c.energies.iter().map(move |&e| (h, e))).collect();
    let results = jobs
        .par_iter()
        .map(|&(h, e)| connect(&c.potential, e, h, &c.matching))
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(&["h", "E", "m11", "m12", "m21", "m22", "det", "imag_defect"]);
    for m in &results {
        t.push(m.csv_row().iter().map(|v| Cell::Num(*v)).collect());
    }
    ctx.write("transfer.csv", &t)
}

fn fit(ctx: &Context) -> Result<(), Failure> {
    let c = &ctx.cfg;
    let e = c.energies[0];
    let f = fit_corrections(&c.potential, e, ctx.need_h()?, c.fit_max_m, c.fit_max_n, &c.matching)?;
    let mut t = Table::new(&["entry", "m", "n", "a_plus", "a_minus"]);
    for (entry, m, n, ap, am) in f.csv_rows() {
        t.push(vec![entry.into(), m.into(), n.into(), ap.into(), am.into()]);
    }
    println!("E={e:?} residual={:.3e}", f.residual);
    match f.smallest_active(10.0) {
        Some(a) => println!("smallest_active_exponent={a:?}"),
        None => println!("smallest_active_exponent=none"),
    }
    ctx.write("fit.csv", &t)
}

fn study(ctx: &Context) -> Result<(), Failure> {
    let c = &ctx.cfg;
    let report = convergence_study(&c.potential, &ctx.window, ctx.need_h()?, &c.methods, &c.matching, &c.oracle)?;
    for w in &report.warnings {
        eprintln!("swkb: warning: {w}");
    }
    let mut t = Table::new(&["h", "method", "max_err", "fitted_slope"]);
    for row in &report.rows {
        let slope: Cell = match report.slope(row.method) {
            Some(s) => s.into(),
            None => "floor".into(),
        };
        t.push(vec![row.h.into(), row.method.name().into(), row.max_err.into(), slope]);
    }
    for s in &report.slopes {
        match s.slope {
            Some(v) => println!("{} slope={v:.4}", s.method),
            None => println!("{} slope=floor", s.method),
        }
    }
    ctx.write("study.csv", &t)
}

struct CheckRow {
    h: f64,
    e: f64,
    name: &'static str,
    value: f64,
    limit: f64,
}

fn check_point(ctx: &Context, h: f64, e: f64) -> Result<Vec<CheckRow>, Error> {
    let c = &ctx.cfg;
    let tol = &c.tolerances;
    let m = connect(&c.potential, e, h, &c.matching)?;
    let o = transfer_matrix(&c.potential, e, h, &c.oracle)?;
    let mut agree = 0.0f64;
    for r in 0..2 {
        for k in 0..2 {
            agree = agree.max((m.entries[r][k] - o[r][k]).abs());
        }
    }
    let icfg = c.matching.interior(&c.potential, e, h)?;
    let (plus, minus) = solve_basis(&c.potential, &icfg)?;
    let w0 = Complex64::new(0.0, -2.0);
    let drift = plus
        .v
        .iter()
        .zip(&plus.v_dot)
        .zip(minus.v.iter().zip(&minus.v_dot))
        .map(|((vp, dp), (vm, dm))| ((vp * dm - dp * vm) / w0 - 1.0).norm())
        .fold(0.0, f64::max);
    let row = |name, value, limit| CheckRow { h, e, name, value, limit };
    Ok(vec![
        row("det", (m.det() - 1.0).abs(), tol.det),
        row("imag_defect", m.imag_defect, tol.imag * m.norm()),
        row("oracle_agreement", agree, tol.oracle_agreement),
        row("interior_wronskian", drift, tol.wronskian),
    ])
}

fn check(ctx: &Context) -> Result<(), Failure> {
    let c = &ctx.cfg;
    let jobs: Vec<(f64, f64)> = ctx.need_h()?.iter().flat_map(|&h| c.energies.iter().map(move |&e| (h, e))).collect();
    let rows: Vec<CheckRow> = jobs
        .par_iter()
        .map(|&(h, e)| check_point(ctx, h, e))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .flatten()
        .collect();
    let mut t = Table::new(&["h", "E", "check", "value", "limit", "pass"]);
    let mut first_failure = None;
    for r in &rows {
        let pass = r.value <= r.limit;
        if !pass && first_failure.is_none() {
            first_failure = Some(format!("{} = {:.3e} > {:.3e} at h = {:?}, E = {:?}", r.name, r.value, r.limit, r.h, r.e));
        }
        t.push(vec![r.h.into(), r.e.into(), r.name.into(), r.value.into(), r.limit.into(), (pass as i64).into()]);
    }
    ctx.write("check.csv", &t)?;
    match first_failure {
        Some(message) => Err(Failure { code: EXIT_TOLERANCE, message }),
        None => {
            println!("all {} checks passed", rows.len());
            Ok(())
        }
    }
}
