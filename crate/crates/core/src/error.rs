use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("non-finite result at z = {z} ({regime})")]
    NonFinite { z: Complex64, regime: String },

    #[error("tolerance {rel_tol:e} cannot be certified at z = {z} ({regime})")]
    ToleranceUnreachable {
        z: Complex64,
        rel_tol: f64,
        regime: String,
    },

    #[error("precision exhausted: {needed} guard digits needed, cap is {cap}")]
    PrecisionExhausted { needed: u32, cap: u32 },

    #[error("|z| = {abs_z} is below the asymptotic switch radius {radius}")]
    OutsideValidity { abs_z: f64, radius: f64 },

    #[error("|arg z| = {arg} exceeds the sector half-angle {theta}")]
    OutsideSector { arg: f64, theta: f64 },

    #[error("derivative order {0} is not supported")]
    UnsupportedOrder(u32),

    #[error("phase bound fails: |phi^({k})({witness})| = {value} < 1")]
    NotCertifiable { k: u32, witness: f64, value: f64 },

    #[error("quadrature did not reach tolerance {tol:e} (estimate {est:e}, {evals} evaluations)")]
    QuadratureFailure { tol: f64, est: f64, evals: usize },

    #[error("amplitude tail {tail:e} beyond R = {radius} exceeds {limit:e}")]
    TailBoundFailure { radius: f64, tail: f64, limit: f64 },

    #[error("evaluation budget exceeded: {needed} > {budget}")]
    BudgetExceeded { needed: usize, budget: usize },

    #[error("hypothesis violated for {setting}: {clause}")]
    HypothesisViolation { setting: String, clause: String },

    #[error("degenerate fit: {usable} usable samples ({excluded} excluded), {reason}")]
    DegenerateFit {
        usable: usize,
        excluded: usize,
        reason: String,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("svg error: {0}")]
    Svg(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn is_hypothesis_violation(&self) -> bool {
        matches!(self, Error::HypothesisViolation { .. } | Error::NotCertifiable { .. })
    }
}
