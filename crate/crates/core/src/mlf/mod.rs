//! Mittag-Leffler functions `E_{α,β}(z) = Σ z^k / Γ(αk+β)`.

mod dd;
mod envelope;
mod eval;
mod oracle;
mod params;

pub use envelope::{fit_envelope_constant, ray_grid, sector_envelope, SectorBoundParams};
pub use eval::{
    ml_derivative_check, ml_eval, ml_eval_asymptotic, Estimate, EvalRoute, Evaluation, MlConfig,
    MlEvaluator,
};
pub use oracle::{
    cancellation_guard, gamma_mp, ml_eval_oracle, ml_eval_oracle_with_cap, series_mp, MpSum,
    DEFAULT_GUARD_CAP,
};
pub use params::{MlParams, Regime};

/// `i^α = e^{iπα/2}` on the principal branch.
pub fn i_pow(alpha: f64) -> num_complex::Complex64 {
    num_complex::Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_2 * alpha)
}
