//! Double-precision evaluation of `E_{α,β}(z)` with per-call error certificates.
//!
//! Three evaluation routes are available and the first one whose error
//! estimate meets the requested relative tolerance wins:
//!
//! * the Taylor series in f64 (only for `|z| ≤ r₀`), with a rounding bound that
//!   accounts for cancellation between terms;
//! * the asymptotic expansion
//!   `E = (1/α) Σ_m ζ_m^{1-β} e^{ζ_m} − Σ_{k≥1} z^{-k}/Γ(β−αk)`,
//!   `ζ_m = |z|^{1/α} e^{i(arg z + 2πm)/α}`, summed over the branches with
//!   `|arg z + 2πm| ≤ απ` (weight ½ on the Stokes line itself);
//! * the series in extended precision (MPFR), which is the oracle algorithm run
//!   at the precision the tolerance requires.
//!
//! `r₁` only orders the last two: above it the expansion is tried first.

use std::f64::consts::PI;
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rug::float::Constant;
use rug::{Assign, Float};
use serde::{Deserialize, Serialize};

use super::dd::Dd;
use super::oracle::{cancellation_guard, series_mp, DEFAULT_GUARD_CAP};
use super::params::MlParams;
use crate::error::{Error, Result};
use crate::special::{ln_gamma_signed, rgamma};

const EPS: f64 = f64::EPSILON;
/// ln(f64::MAX) with a little room for the prefactors.
const LN_MAX: f64 = 709.0;
/// Guard digits above which the expansion is preferred even inside `r₁`.
const MID_GUARD_PREFERENCE: f64 = 30.0;
/// Working precision of the cached extended-precision route (≈ 77 digits).
const CACHE_BITS: u32 = 256;
const CACHE_DIGITS: f64 = 77.0;
/// The exponent is formed in f64 (with its rounding charged to the error
/// estimate) while that rounding stays below this fraction of the tolerance;
/// otherwise it is formed in MPFR.
const F64_PHASE_SHARE: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlConfig {
    /// r₀: the f64 series is attempted for `|z| ≤ r₀`.
    pub series_radius: f64,
    /// r₁: beyond this radius the asymptotic expansion is attempted first.
    pub asymptotic_radius: f64,
    /// Cap on the extended-precision cancellation guard, in digits.
    pub guard_cap: u32,
    /// Upper limit on algebraic terms the evaluator itself will sum.
    pub max_asymptotic_terms: usize,
}

impl Default for MlConfig {
    fn default() -> Self {
        Self {
            series_radius: 5.0,
            asymptotic_radius: 40.0,
            guard_cap: DEFAULT_GUARD_CAP,
            max_asymptotic_terms: 60,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EvalRoute {
    Series,
    Asymptotic,
    ExtendedSeries,
}

impl EvalRoute {
    pub fn name(&self) -> &'static str {
        match self {
            EvalRoute::Series => "series",
            EvalRoute::Asymptotic => "asymptotic",
            EvalRoute::ExtendedSeries => "extended-precision series",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Evaluation {
    pub value: Complex64,
    pub route: EvalRoute,
    /// Absolute error estimate.
    pub error: f64,
}

/// Value of a route together with its absolute error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
}

/// Evaluator for one fixed `(α, β)`; caches gamma tables between calls.
#[derive(Debug)]
pub struct MlEvaluator {
    params: MlParams,
    config: MlConfig,
    tables: Arc<Tables>,
    /// α ∈ {1, 2} with integer β: the expansion is the function itself.
    exact_expansion: bool,
}

/// Coefficient tables, shared by every evaluator with the same `(α, β)` and
/// table-shaping configuration.
#[derive(Debug)]
struct Tables {
    /// (ln|Γ(αk+β)|, sign) for the f64 series.
    series: Vec<(f64, f64)>,
    /// 1/Γ(β − αk), k = 0..=max_asymptotic_terms (index 0 unused).
    algebraic: Vec<f64>,
    mp: OnceLock<Vec<(Float, f64)>>,
}

type TableKey = (u64, u64, u64, usize);

fn shared_tables(key: TableKey, build: impl FnOnce() -> Tables) -> Arc<Tables> {
    static CACHE: OnceLock<Mutex<HashMap<TableKey, Arc<Tables>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().expect("table cache poisoned").get(&key) {
        return t.clone();
    }
    let built = Arc::new(build());
    cache.lock().expect("table cache poisoned").entry(key).or_insert(built).clone()
}

impl MlEvaluator {
    pub fn new(params: MlParams) -> Self {
        Self::with_config(params, MlConfig::default())
    }

    pub fn with_config(params: MlParams, config: MlConfig) -> Self {
        let (alpha, beta) = (params.alpha(), params.beta());
        let key = (alpha.to_bits(), beta.to_bits(), config.series_radius.to_bits(), config.max_asymptotic_terms);
        let tables = shared_tables(key, || {
            let ln_r0 = config.series_radius.max(1e-3).ln();
            let mut series = Vec::new();
            let mut k = 0usize;
            loop {
                let x = alpha * k as f64 + beta;
                let (lg, s) = ln_gamma_signed(x);
                series.push((lg, s));
                // stop once terms at |z| = r₀ have underflowed past the peak
                if x > 2.0 && (k as f64) * ln_r0 - lg < -750.0 {
                    break;
                }
                if k > 200_000 {
                    break;
                }
                k += 1;
            }
            let algebraic = (0..=config.max_asymptotic_terms)
                .map(|k| rgamma(beta - alpha * k as f64))
                .collect();
            Tables { series, algebraic, mp: OnceLock::new() }
        });
        let exact_expansion = (alpha == 1.0 || alpha == 2.0) && beta == beta.round();
        Self { params, config, tables, exact_expansion }
    }

    pub fn params(&self) -> MlParams {
        self.params
    }

    pub fn config(&self) -> &MlConfig {
        &self.config
    }

    /// `E_{α,β}(z)` to relative tolerance `rel_tol ∈ [1e-14, 1e-4]`.
    pub fn eval(&self, z: Complex64, rel_tol: f64) -> Result<Complex64> {
        self.eval_detailed(z, rel_tol).map(|e| e.value)
    }

    pub fn eval_detailed(&self, z: Complex64, rel_tol: f64) -> Result<Evaluation> {
        if !(1e-14..=1e-4).contains(&rel_tol) {
            return Err(Error::InvalidParams(format!("rel_tol = {rel_tol:e} not in [1e-14, 1e-4]")));
        }
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::InvalidParams(format!("non-finite argument {z}")));
        }
        let abs_z = z.norm();
        if abs_z == 0.0 {
            return Ok(Evaluation {
                value: Complex64::new(rgamma(self.params.beta()), 0.0),
                route: EvalRoute::Series,
                error: 0.0,
            });
        }
        if self.log_magnitude_bound(z) > LN_MAX {
            return Err(Error::NonFinite { z, regime: "exponential growth beyond f64 range".into() });
        }

        let accept = |e: &Estimate| {
            e.value.re.is_finite() && e.value.im.is_finite() && e.error <= 0.5 * rel_tol * e.value.norm()
        };

        if abs_z <= self.config.series_radius {
            let s = self.series_f64(z);
            if accept(&s) {
                return Ok(Evaluation { value: s.value, route: EvalRoute::Series, error: s.error });
            }
        }

        let guard = cancellation_guard(self.params.alpha(), abs_z);
        let asym_first = abs_z > self.config.asymptotic_radius || guard > MID_GUARD_PREFERENCE;
        let mut last_route = EvalRoute::Series;
        for route in if asym_first {
            [EvalRoute::Asymptotic, EvalRoute::ExtendedSeries]
        } else {
            [EvalRoute::ExtendedSeries, EvalRoute::Asymptotic]
        } {
            last_route = route;
            match route {
                EvalRoute::Asymptotic => {
                    let a = self.asymptotic(z, None, rel_tol)?;
                    if accept(&a) {
                        return Ok(Evaluation { value: a.value, route, error: a.error });
                    }
                }
                EvalRoute::ExtendedSeries => {
                    if let Some(v) = self.extended_series(z, rel_tol)? {
                        return Ok(Evaluation {
                            value: v,
                            route,
                            error: rel_tol * v.norm() * 1e-3,
                        });
                    }
                }
                EvalRoute::Series => unreachable!(),
            }
        }
        Err(Error::ToleranceUnreachable { z, rel_tol, regime: last_route.name().into() })
    }

    /// Upper estimate of ln|E(z)| from the dominant exponential branch.
    fn log_magnitude_bound(&self, z: Complex64) -> f64 {
        let alpha = self.params.alpha();
        let beta = self.params.beta();
        let ln_abs = z.norm().ln();
        let theta = z.arg();
        let rho = z.norm().powf(1.0 / alpha);
        let mut best = f64::NEG_INFINITY;
        for m in self.branch_range(theta) {
            let t = theta + 2.0 * PI * m as f64;
            let w = (1.0 - beta) / alpha * ln_abs + rho * (t / alpha).cos() - alpha.ln();
            best = best.max(w);
        }
        best
    }

    fn branch_range(&self, theta: f64) -> std::ops::RangeInclusive<i64> {
        let ap = self.params.alpha() * PI;
        let lo = ((-ap - theta) / (2.0 * PI)).ceil() as i64;
        let hi = ((ap - theta) / (2.0 * PI)).floor() as i64;
        lo..=hi
    }

    /// Taylor series in f64 with a rounding/truncation bound.
    pub fn series_f64(&self, z: Complex64) -> Estimate {
        let alpha = self.params.alpha();
        let beta = self.params.beta();
        let ln_abs = z.norm().ln();
        let theta = z.arg();
        let mut sum = Complex64::new(0.0, 0.0);
        let mut abs_sum = 0.0;
        let mut err = 0.0;
        let mut k = 0usize;
        let mut tail = f64::INFINITY;
        loop {
            let x = alpha * k as f64 + beta;
            let (lg, sign) = match self.tables.series.get(k) {
                Some(&v) => v,
                None => ln_gamma_signed(x),
            };
            let mut ln_t = f64::NEG_INFINITY;
            if sign != 0.0 {
                let kl = k as f64 * ln_abs;
                ln_t = kl - lg;
                let phase = k as f64 * theta;
                let t = Complex64::from_polar(sign * ln_t.exp(), phase);
                sum += t;
                let at = t.norm();
                abs_sum += at;
                err += at * 4.0 * EPS * (1.0 + kl.abs() + lg.abs() + phase.abs());
            }
            if x > 0.0 && ln_t.is_finite() {
                let lg_next = match self.tables.series.get(k + 1) {
                    Some(&(l, _)) => l,
                    None => ln_gamma_signed(x + alpha).0,
                };
                let ratio = (ln_abs + lg - lg_next).exp() * (1.0 + 1e-10);
                if ratio < 1.0 {
                    let t_abs = ln_t.exp();
                    tail = t_abs * ratio / (1.0 - ratio);
                    if tail <= 0.1 * EPS * sum.norm() || tail < 1e-300 {
                        break;
                    }
                }
            }
            if k > 400_000 {
                break;
            }
            k += 1;
        }
        err += (k as f64 + 1.0) * EPS * abs_sum + tail;
        Estimate { value: sum, error: err }
    }

    /// Asymptotic expansion with an explicit number of algebraic terms.
    pub fn asymptotic_terms(&self, z: Complex64, n_terms: usize) -> Result<Estimate> {
        self.asymptotic(z, Some(n_terms), 1e-14)
    }

    fn asymptotic(&self, z: Complex64, n_terms: Option<usize>, rel_tol: f64) -> Result<Estimate> {
        let alpha = self.params.alpha();
        let beta = self.params.beta();
        let abs_z = z.norm();
        let ln_abs = abs_z.ln();
        let theta = z.arg();
        let rho = abs_z.powf(1.0 / alpha);
        let ap = alpha * PI;

        let mut expo = Complex64::new(0.0, 0.0);
        let mut expo_abs = 0.0;
        for m in self.branch_range(theta) {
            let t = theta + 2.0 * PI * m as f64;
            let weight = if t.abs() == ap { 0.5 } else { 1.0 };
            let ca = (1.0 - beta) / alpha;
            let f64_err = EPS * (rho * (1.0 / alpha + 2.0 + t.abs() / alpha) + ca.abs() * (ln_abs.abs() + t.abs()));
            let (re_w, phase, phase_err) = if f64_err <= F64_PHASE_SHARE * rel_tol {
                let (s, c) = (t / alpha).sin_cos();
                (rho * c + ca * ln_abs, rho * s + ca * t, f64_err)
            } else {
                let (r, p) = exponent_extended(z, alpha, beta, m);
                (r, p, 0.0)
            };
            if re_w > LN_MAX {
                return Err(Error::NonFinite { z, regime: "asymptotic".into() });
            }
            let term = Complex64::from_polar(re_w.exp() * weight / alpha, phase);
            expo += term;
            expo_abs += term.norm() * (2.0 + re_w.abs() + phase_err / EPS);
        }

        let inv = z.inv();
        let mut alg = Complex64::new(0.0, 0.0);
        let mut alg_abs = 0.0;
        let mut pw = Complex64::new(1.0, 0.0);
        let max_terms = n_terms.unwrap_or(self.config.max_asymptotic_terms);
        let mut prev = f64::INFINITY;
        let truncation;
        let mut k = 1usize;
        loop {
            pw *= inv;
            let c = self.algebraic_coef(k);
            let term = pw * c;
            let mag = term.norm();
            if k > max_terms {
                truncation = mag;
                break;
            }
            if n_terms.is_none() && c != 0.0 {
                if mag > prev {
                    // divergent from here on; the smallest term bounds the error
                    truncation = prev;
                    break;
                }
                prev = mag;
            }
            alg -= term;
            alg_abs += mag;
            if n_terms.is_none() && mag <= 1e-3 * EPS * alg.norm().max(1e-300) && c != 0.0 {
                truncation = mag;
                break;
            }
            k += 1;
        }
        let value = expo + alg;

        let mut error = 4.0 * EPS * (expo_abs + alg_abs * (1.0 + k as f64));
        if !self.exact_expansion {
            let stokes = (1.0 / alpha) * ((1.0 - beta) / alpha * ln_abs - rho).exp();
            error += truncation + stokes;
        }
        Ok(Estimate { value, error })
    }

    fn algebraic_coef(&self, k: usize) -> f64 {
        match self.tables.algebraic.get(k) {
            Some(&c) => c,
            None => rgamma(self.params.beta() - self.params.alpha() * k as f64),
        }
    }

    /// `(1/Γ(αk+β), ln|Γ(αk+β)|)` at `CACHE_BITS`.
    fn mp_coefficients(&self) -> &[(Float, f64)] {
        self.tables.mp.get_or_init(|| {
            let alpha = self.params.alpha();
            let beta = self.params.beta();
            // enough terms for a guard of CACHE_DIGITS at the largest |z|
            let rho_cap = CACHE_DIGITS / std::f64::consts::LOG10_E;
            let n = ((3.0 * rho_cap + 80.0) / alpha).ceil() as usize + 8;
            (0..n)
                .map(|k| {
                    let x = Float::with_val(CACHE_BITS, alpha) * k as u32 + Float::with_val(CACHE_BITS, beta);
                    if x.is_integer() && x <= 0 {
                        (Float::with_val(CACHE_BITS, 0), f64::INFINITY)
                    } else {
                        let lg = x.clone().ln_abs_gamma().0.to_f64();
                        (Float::with_val(CACHE_BITS, 1) / x.gamma(), lg)
                    }
                })
                .collect()
        })
    }

    /// The series at extended precision. `None` when the guard exceeds the cap.
    fn extended_series(&self, z: Complex64, rel_tol: f64) -> Result<Option<Complex64>> {
        let digits = (-rel_tol.log10()).ceil() + 3.0;
        let guard = cancellation_guard(self.params.alpha(), z.norm());
        if guard + digits + 6.0 <= CACHE_DIGITS {
            if let Some(v) = self.cached_series(z, digits, guard) {
                return Ok(Some(v));
            }
        }
        match series_mp(self.params, z, digits as u32, self.config.guard_cap) {
            Ok(s) => Ok(Some(s.value)),
            Err(Error::PrecisionExhausted { .. }) => Ok(None),
            Err(e) => Err(e),
        }
    }

    fn cached_series(&self, z: Complex64, digits: f64, guard: f64) -> Option<Complex64> {
        let coef = self.mp_coefficients();
        let alpha = self.params.alpha();
        let beta = self.params.beta();
        let ln_abs = z.norm().ln();
        let bits = (((digits + guard + 6.0) / std::f64::consts::LOG10_2).ceil() as u32).clamp(64, CACHE_BITS);
        let zr = Float::with_val(bits, z.re);
        let zi = Float::with_val(bits, z.im);
        let mut pr = Float::with_val(bits, 1);
        let mut pi = Float::with_val(bits, 0);
        let mut sr = Float::with_val(bits, 0);
        let mut si = Float::with_val(bits, 0);
        let mut tr = Float::new(bits);
        let mut ti = Float::new(bits);
        let mut a = Float::new(bits);
        let mut b = Float::new(bits);
        let mut max_term = 0.0f64;
        let tol = 10f64.powf(-digits);
        let floor = 10f64.powf(-(digits + guard + 4.0));
        for k in 0..coef.len() {
            let (c, lg) = &coef[k];
            tr.assign(&pr * c);
            ti.assign(&pi * c);
            let t_abs = tr.to_f64().hypot(ti.to_f64());
            max_term = max_term.max(t_abs);
            sr += &tr;
            si += &ti;
            let x = alpha * k as f64 + beta;
            if x > 0.0 && lg.is_finite() && k + 1 < coef.len() {
                let ratio = (ln_abs + lg - coef[k + 1].1).exp() * (1.0 + 1e-10);
                if ratio < 1.0 {
                    let tail = t_abs * ratio / (1.0 - ratio);
                    let s = sr.to_f64().hypot(si.to_f64());
                    if tail <= tol * s && tail <= floor * max_term {
                        if s == 0.0 || !s.is_finite() || !max_term.is_finite() {
                            return None;
                        }
                        let loss = (max_term / s).log10().max(0.0);
                        if loss > guard + 4.0 {
                            return None;
                        }
                        return Some(Complex64::new(sr.to_f64(), si.to_f64()));
                    }
                }
            }
            // z^{k+1}
            a.assign(&pr * &zr);
            b.assign(&pi * &zi);
            a -= &b;
            b.assign(&pr * &zi);
            pi *= &zr;
            pi += &b;
            std::mem::swap(&mut pr, &mut a);
        }
        None
    }
}

/// Largest `log₂|ζ|` for which double-double keeps 53 bits of the phase with
/// margin.
const DD_MAX_LOG2_RHO: f64 = 40.0;

/// `ln(ζ_m^{1-β} e^{ζ_m})` in extended precision: double-double while it
/// suffices, MPFR beyond.
fn exponent_extended(z: Complex64, alpha: f64, beta: f64, m: i64) -> (f64, f64) {
    if z.norm().log2() / alpha <= DD_MAX_LOG2_RHO {
        exponent_dd(z, alpha, beta, m)
    } else {
        exponent_mp(z, alpha, beta, m)
    }
}

fn exponent_dd(z: Complex64, alpha: f64, beta: f64, m: i64) -> (f64, f64) {
    let t = Dd::atan2(z.im, z.re) + Dd::tau() * Dd::new(m as f64);
    let ln_abs = Dd::norm_sqr(z.re, z.im).ln() * Dd::new(0.5);
    let inv_a = Dd::ONE / Dd::new(alpha);
    let rho = (ln_abs * inv_a).exp();
    let (s, c) = (t * inv_a).sin_cos();
    let ca = (Dd::ONE - Dd::new(beta)) * inv_a;
    let re = rho * c + ca * ln_abs;
    let im = (rho * s + ca * t).rem_tau();
    (re.to_f64(), im.to_f64())
}

/// `ln(ζ_m^{1-β} e^{ζ_m})` for branch `m`, as (real part, phase reduced to
/// (−π, π]). Computed in MPFR from the exact f64 input so that the phase of a
/// large `ζ` carries no amplified rounding error.
fn exponent_mp(z: Complex64, alpha: f64, beta: f64, m: i64) -> (f64, f64) {
    // 53 bits of the result plus the integer bits of |ζ| and a margin
    let log2_rho = (z.norm().log2() / alpha).max(0.0);
    let prec: u32 = 80 + log2_rho.ceil() as u32;
    let zr = Float::with_val(prec, z.re);
    let zi = Float::with_val(prec, z.im);
    let two_pi = Float::with_val(prec, Constant::Pi) * 2u32;
    let t = Float::with_val(prec, zi.atan2_ref(&zr)) + Float::with_val(prec, &two_pi * m);
    let ln_abs = Float::with_val(prec, zr.hypot_ref(&zi)).ln();
    let inv_a = Float::with_val(prec, 1) / alpha;
    let rho = Float::with_val(prec, &ln_abs * &inv_a).exp();
    let ang = Float::with_val(prec, &t * &inv_a);
    let (s, c) = ang.sin_cos(Float::new(prec));
    let ca = Float::with_val(prec, 1.0 - beta) * &inv_a;
    let re = Float::with_val(prec, &rho * &c) + Float::with_val(prec, &ca * &ln_abs);
    let im = Float::with_val(prec, &rho * &s) + Float::with_val(prec, &ca * &t);
    let im = im.remainder(&two_pi);
    (re.to_f64(), im.to_f64())
}

/// `E_{α,β}(z)` with the default configuration.
pub fn ml_eval(params: MlParams, z: Complex64, rel_tol: f64) -> Result<Complex64> {
    MlEvaluator::new(params).eval(z, rel_tol)
}

/// The N-term asymptotic value, valid for `|z| ≥ r₁` and `1 ≤ N ≤ 20`.
pub fn ml_eval_asymptotic(params: MlParams, z: Complex64, n_terms: usize) -> Result<Complex64> {
    let config = MlConfig::default();
    if z.norm() < config.asymptotic_radius {
        return Err(Error::OutsideValidity { abs_z: z.norm(), radius: config.asymptotic_radius });
    }
    if !(1..=20).contains(&n_terms) {
        return Err(Error::InvalidParams(format!("n_terms = {n_terms} not in 1..=20")));
    }
    MlEvaluator::with_config(params, config)
        .asymptotic_terms(z, n_terms)
        .map(|e| e.value)
}

/// `|ΔE_{α,1}(z)/2h − (1/α) E_{α,α}(z)|` with a central difference along the
/// real axis.
pub fn ml_derivative_check(params: MlParams, z: Complex64, h: f64) -> Result<f64> {
    if params.beta() != 1.0 {
        return Err(Error::InvalidParams(format!("derivative check needs beta = 1, got {}", params.beta())));
    }
    if !(1e-8..=1e-4).contains(&h) {
        return Err(Error::InvalidParams(format!("h = {h:e} not in [1e-8, 1e-4]")));
    }
    let alpha = params.alpha();
    let e1 = MlEvaluator::new(params);
    let ea = MlEvaluator::new(MlParams::new(alpha, alpha)?);
    let tol = 1e-14;
    let hc = Complex64::new(h, 0.0);
    let diff = (e1.eval(z + hc, tol)? - e1.eval(z - hc, tol)?) / (2.0 * h);
    let rhs = ea.eval(z, tol)? / alpha;
    Ok((diff - rhs).norm())
}
