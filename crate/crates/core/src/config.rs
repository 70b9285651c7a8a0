//! Line-oriented `key=value` study configuration.
//!
//! ```text
//! gamma=0.5
//! b=1.0
//! w.kind=polynomial
//! w.coeffs=1.0,0.5
//! window.e_min=2
//! window.e_max=3
//! study.h_list=1e-2,5e-3
//! study.methods=bs_leading,matched
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Unknown or repeated
//! keys are errors.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::matching::{ExteriorMode, MatchConfig};
use crate::oracle::{OracleConfig, MIN_H};
use crate::potential::{EnergyWindow, Potential, Weight, DEFAULT_TAYLOR_ORDER};
use crate::spectral::Method;

const KEYS: &[&str] = &[
    "gamma",
    "b",
    "w.kind",
    "w.coeffs",
    "w.taylor_order",
    "window.e_min",
    "window.e_max",
    "study.h_list",
    "study.methods",
    "study.order",
    "study.delta_int",
    "study.eps",
    "study.energies",
    "study.mode",
    "study.fit_max_m",
    "study.fit_max_n",
    "study.out",
    "tol.oracle_rtol",
    "tol.ode_rtol",
    "tol.imag",
    "tol.det",
    "tol.oracle_agreement",
    "tol.wronskian",
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub det: f64,
    pub imag: f64,
    pub oracle_agreement: f64,
    /// Relative drift of the interior Wronskian along the grid.
    pub wronskian: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { det: 1e-6, imag: 1e-6, oracle_agreement: 1e-4, wronskian: 1e-8 }
    }
}

#[derive(Debug, Clone)]
pub struct StudyConfig {
    pub potential: Potential,
    pub window: EnergyWindow,
    /// Sorted descending.
    pub h_list: Vec<f64>,
    pub methods: Vec<Method>,
    /// Energies for transfer, fit and check; defaults to the window midpoint.
    pub energies: Vec<f64>,
    pub matching: MatchConfig,
    pub oracle: OracleConfig,
    pub fit_max_m: u32,
    pub fit_max_n: u32,
    pub out: Option<PathBuf>,
    pub tolerances: Tolerances,
    /// Sorted `key=value` lines, the input to the config hash.
    pub canonical: String,
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.trim().parse::<f64>().map_err(|_| Error::ConfigParse(format!("{key}: '{v}' is not a number")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').filter(|s| !s.trim().is_empty()).map(|s| parse_f64(key, s)).collect()
}

fn parse_uint(key: &str, v: &str) -> Result<u32> {
    v.trim().parse::<u32>().map_err(|_| Error::ConfigParse(format!("{key}: '{v}' is not a non-negative integer")))
}

/// Splits the text into a key map, rejecting unknown and duplicate keys.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::ConfigParse(format!("line {}: expected key=value", n + 1)))?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(Error::ConfigParse(format!("line {}: unknown key '{k}'", n + 1)));
        }
        if map.insert(k.to_string(), v.trim().to_string()).is_some() {
            return Err(Error::ConfigParse(format!("line {}: duplicate key '{k}'", n + 1)));
        }
    }
    Ok(map)
}

impl StudyConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let map = parse_pairs(text)?;
        let get = |k: &str| map.get(k).map(String::as_str);
        let need = |k: &str| get(k).ok_or_else(|| Error::ConfigParse(format!("missing key '{k}'")));

        let gamma = parse_f64("gamma", need("gamma")?)?;
        let b = parse_f64("b", need("b")?)?;
        let taylor_order = match get("w.taylor_order") {
            Some(v) => parse_uint("w.taylor_order", v)? as usize,
            None => DEFAULT_TAYLOR_ORDER,
        };
        let kind = need("w.kind")?;
        let coeffs = match get("w.coeffs") {
            Some(v) => parse_list("w.coeffs", v)?,
            None => Vec::new(),
        };
        let (weight, degenerate) = match kind {
            "zero" => (Weight::Constant(0.0), true),
            "constant" => match coeffs.as_slice() {
                [c] => (Weight::Constant(*c), false),
                _ => return Err(Error::ConfigParse("w.coeffs: constant needs exactly one value".into())),
            },
            "polynomial" if !coeffs.is_empty() => (Weight::Polynomial(coeffs), false),
            "exp_poly" if !coeffs.is_empty() => (Weight::ExpPoly(coeffs), false),
            "polynomial" | "exp_poly" => return Err(Error::ConfigParse(format!("w.coeffs missing for {kind}"))),
            other => return Err(Error::ConfigParse(format!("w.kind: unknown kind '{other}'"))),
        };
        let potential = Potential::from_weight(gamma, b, Arc::new(weight), degenerate, taylor_order)?;

        let window = EnergyWindow::new(
            parse_f64("window.e_min", need("window.e_min")?)?,
            parse_f64("window.e_max", need("window.e_max")?)?,
        )?;

        let mut h_list = match get("study.h_list") {
            Some(v) => parse_list("study.h_list", v)?,
            None => Vec::new(),
        };
        if let Some(&h) = h_list.iter().find(|h| !(**h >= MIN_H && **h < 1.0)) {
            return Err(Error::ConfigParse(format!("study.h_list: {h} outside [{MIN_H}, 1)")));
        }
        h_list.sort_by(|a, b| b.total_cmp(a));
        h_list.dedup();

        let methods = match get("study.methods") {
            Some(v) => v.split(',').map(str::parse).collect::<Result<Vec<Method>>>()?,
            None => vec![Method::BsLeading, Method::Matched],
        };
        let energies = match get("study.energies") {
            Some(v) => parse_list("study.energies", v)?,
            None => vec![0.5 * (window.e_min + window.e_max)],
        };

        let mut matching = MatchConfig::default();
        if let Some(v) = get("study.order") {
            matching.order = parse_uint("study.order", v)? as usize;
        }
        if let Some(v) = get("study.delta_int") {
            matching.delta_int = Some(parse_f64("study.delta_int", v)?);
        }
        if let Some(v) = get("study.eps") {
            matching.eps = Some(parse_f64("study.eps", v)?);
        }
        if let Some(v) = get("study.mode") {
            matching.mode = match v {
                "corrected" => ExteriorMode::Corrected,
                "quasimode" => ExteriorMode::Quasimode,
                other => return Err(Error::ConfigParse(format!("study.mode: unknown mode '{other}'"))),
            };
        }
        let mut tolerances = Tolerances::default();
        let mut oracle = OracleConfig::default();
        if let Some(v) = get("tol.oracle_rtol") {
            oracle.rtol = parse_f64("tol.oracle_rtol", v)?;
            oracle.atol = 1e-2 * oracle.rtol;
        }
        if let Some(v) = get("tol.ode_rtol") {
            matching.ode.rtol = parse_f64("tol.ode_rtol", v)?;
            matching.ode.atol = 1e-2 * matching.ode.rtol;
        }
        if let Some(v) = get("tol.imag") {
            tolerances.imag = parse_f64("tol.imag", v)?;
            matching.imag_tol = tolerances.imag;
        }
        if let Some(v) = get("tol.det") {
            tolerances.det = parse_f64("tol.det", v)?;
        }
        if let Some(v) = get("tol.oracle_agreement") {
            tolerances.oracle_agreement = parse_f64("tol.oracle_agreement", v)?;
        }
        if let Some(v) = get("tol.wronskian") {
            tolerances.wronskian = parse_f64("tol.wronskian", v)?;
        }
        let fit_max_m = get("study.fit_max_m").map(|v| parse_uint("study.fit_max_m", v)).transpose()?.unwrap_or(2);
        let fit_max_n = get("study.fit_max_n").map(|v| parse_uint("study.fit_max_n", v)).transpose()?.unwrap_or(1);
        let out = get("study.out").map(PathBuf::from);

        let canonical = map.iter().map(|(k, v)| format!("{k}={v}\n")).collect();
        Ok(Self {
            potential,
            window,
            h_list,
            methods,
            energies,
            matching,
            oracle,
            fit_max_m,
            fit_max_n,
            out,
            tolerances,
            canonical,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const LINEAR: &str = "gamma=1\nb=1\nw.kind=constant\nw.coeffs=1\nwindow.e_min=2\nwindow.e_max=3\n";

    #[test]
    fn parses_minimal_config() {
        let c = StudyConfig::parse(LINEAR).unwrap();
        assert_eq!(c.potential.gamma(), 1.0);
        assert_eq!(c.energies, vec![2.5]);
        assert_eq!(c.methods, vec![Method::BsLeading, Method::Matched]);
        assert!(c.h_list.is_empty());
    }

    #[test]
    fn canonical_form_ignores_layout() {
        let a = StudyConfig::parse(LINEAR).unwrap();
        let shuffled = "# comment\n\nwindow.e_max = 3\nb=1\ngamma=1\nw.kind=constant\nw.coeffs=1\nwindow.e_min=2\n";
        assert_eq!(a.canonical, StudyConfig::parse(shuffled).unwrap().canonical);
    }

    #[test]
    fn h_list_sorted_and_bounded() {
        let c = StudyConfig::parse(&format!("{LINEAR}study.h_list=1e-3,1e-2,5e-3\n")).unwrap();
        assert_eq!(c.h_list, vec![1e-2, 5e-3, 1e-3]);
        let e = StudyConfig::parse(&format!("{LINEAR}study.h_list=1e-5\n")).unwrap_err();
        assert!(matches!(e, Error::ConfigParse(_)));
    }

    #[test]
    fn rejects_bad_input() {
        for bad in [
            format!("{LINEAR}colour=red\n"),
            format!("{LINEAR}gamma=2\n"),
            format!("{LINEAR}study.methods=exact\n"),
            "gamma=1\nb=1\n".to_string(),
            "gamma one\n".to_string(),
        ] {
            assert!(matches!(StudyConfig::parse(&bad), Err(Error::ConfigParse(_))), "{bad}");
        }
    }

    #[test]
    fn zero_kind_is_free_particle() {
        let c = StudyConfig::parse("gamma=1\nb=1\nw.kind=zero\nwindow.e_min=1\nwindow.e_max=4\n").unwrap();
        assert!(c.potential.is_degenerate());
        assert_eq!(c.potential.v(0.5), 0.0);
    }
}
