pub mod chebyshev;
pub mod config;
pub mod error;
pub mod gte;
pub mod interior;
pub mod matching;
pub mod ode;
pub mod oracle;
pub mod potential;
pub mod quadrature;
pub mod report;
pub mod roots;
pub mod spectral;
pub mod wkb;

pub use error::{Error, Result};

pub use config::StudyConfig;
pub use interior::{InteriorConfig, InteriorSolution};
pub use matching::{connect, ExteriorMode, MatchConfig, TransferMatrix};
pub use oracle::OracleConfig;
pub use potential::{EnergyWindow, Potential, Weight};
pub use spectral::{Method, SpectralResult};
pub use wkb::{build_quasimode, CauchyDatum, Quasimode, QuasimodeOptions, Sign};
