use thiserror::Error;

/// Errors raised by the numerical pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("energy gap is not positive: delta = {delta:.6e}")]
    NonPositiveGap { delta: f64 },
    #[error("potential decreases between x = {x0} and x = {x1} (drop {drop:.3e})")]
    NotIncreasing { x0: f64, x1: f64, drop: f64 },
    #[error("W is not positive at x = {x} (W = {value:.6e})")]
    NonPositiveW { x: f64, value: f64 },
    #[error("coordinate {x} outside [{lo}, {hi}]")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },
    #[error("quadrature failed to reach tolerance {tol:.1e} (estimate {estimate:.3e})")]
    QuadratureFailure { tol: f64, estimate: f64 },
    #[error("invalid potential: {0}")]
    InvalidPotential(String),
    #[error("invalid energy window: {0}")]
    InvalidWindow(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("expansions built with different gamma ({0} vs {1})")]
    GammaMismatch(f64, f64),
    #[error("energy must be positive (got {0})")]
    NonPositiveEnergy(f64),
    #[error("exponent -1 present: antiderivative would need a logarithm")]
    ExponentMinusOne,

    #[error("Chebyshev and series amplitudes disagree for A_{k} at x = {x:.3e} (relative {rel:.3e})")]
    RepresentationMismatch { k: usize, x: f64, rel: f64 },
    #[error("Chebyshev differentiation round-off estimate {estimate:.3e} exceeds {limit:.1e}")]
    DifferentiationUnstable { estimate: f64, limit: f64 },

    #[error("interior operator norm {norm:.4} is not below 1/2")]
    ContractionFailure { norm: f64 },
    #[error("interior grid too coarse: Richardson disagreement {disagreement:.3e} with {points} points")]
    GridTooCoarse { disagreement: f64, points: usize },
    #[error("Taylor coefficients of W available to order {available}, need {needed}")]
    TaylorOrderInsufficient { available: usize, needed: usize },

    #[error("ill-conditioned basis at {location} (condition number {cond:.3e})")]
    IllConditionedBasis { location: &'static str, cond: f64 },
    #[error("tolerance exceeded: {what} = {value:.3e} > {limit:.3e}")]
    ToleranceExceeded { what: &'static str, value: f64, limit: f64 },
    #[error("least-squares design matrix is rank deficient (rank {rank} < {cols})")]
    RankDeficient { rank: usize, cols: usize },

    #[error("two roots fell into one scan cell near E = {0}")]
    BracketLost(f64),
    #[error("eigenvalue alignment ambiguous: {0}")]
    AlignmentFailure(String),

    #[error("ODE step size underflow at x = {x}")]
    StepUnderflow { x: f64 },
    #[error("ODE tolerance not met after {steps} steps")]
    ToleranceNotMet { steps: usize },

    #[error("config: {0}")]
    ConfigParse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
