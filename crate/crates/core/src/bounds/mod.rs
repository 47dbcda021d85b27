//! Decay estimates for `I_{α,β}(λ)` as executable settings: hypothesis
//! checks, predicted rates, log-log fits and bound verification.
//!
//! Every setting predicts `|I(λ)| ≤ M · A(ψ) · base^{−e} · log^{p}(1+λ) ·
//! (1+λ)^{g}`, where `base` is `λ`, `1+λm` or `λm` and `A(ψ)` is the
//! amplitude functional of the setting. Constants `M` are never estimated;
//! verification checks that the normalized ratio `|I| / (A(ψ)·rate)` stays
//! below a cap and that the fitted slope is no shallower than `−e`.

mod fit;
mod verify;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use fit::{fit_decay, geometric_grid, DecayFit, FitModel, MIN_DECADES, MIN_FIT_POINTS, VALUE_FLOOR};
pub use verify::{
    riemann_lebesgue_report, verify_bound, verify_samples, BoundReport, BoundSample, VerifyOptions,
};

use crate::error::{Error, Result};
use crate::mlf::MlParams;
use crate::phases::{Amplitude, Domain, Phase, PhaseCert};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TheoremId {
    T21i,
    T21ii,
    T21iii,
    T22,
    T31i,
    T31ii,
    T32i,
    T32ii,
    T33,
    T34,
    T35,
    RL,
}

impl TheoremId {
    pub const ALL: [TheoremId; 12] = [
        TheoremId::T21i,
        TheoremId::T21ii,
        TheoremId::T21iii,
        TheoremId::T22,
        TheoremId::T31i,
        TheoremId::T31ii,
        TheoremId::T32i,
        TheoremId::T32ii,
        TheoremId::T33,
        TheoremId::T34,
        TheoremId::T35,
        TheoremId::RL,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TheoremId::T21i => "T21i",
            TheoremId::T21ii => "T21ii",
            TheoremId::T21iii => "T21iii",
            TheoremId::T22 => "T22",
            TheoremId::T31i => "T31i",
            TheoremId::T31ii => "T31ii",
            TheoremId::T32i => "T32i",
            TheoremId::T32ii => "T32ii",
            TheoremId::T33 => "T33",
            TheoremId::T34 => "T34",
            TheoremId::T35 => "T35",
            TheoremId::RL => "RL",
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Parse(format!("unknown theorem '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlphaReq {
    /// `0 < α < 2`
    BelowTwo,
    /// `0 < α ≤ 2`
    UpToTwo,
    /// `α = 2`
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaReq {
    AtLeastAlphaPlusOne,
    BetweenOneAndAlphaPlusOne,
    GreaterThanOne,
    One,
    EqualsAlpha,
    /// `β = α` or `β > 1`
    AlphaOrAboveOne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainReq {
    WholeLine,
    Interval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhaseReq {
    /// `m = inf |φ| > 0`
    InfAbsPositive,
    /// `φ` invertible with `m = inf |φ′| > 0`
    InvertibleWithDerivBound,
    /// `|φ^{(k)}| ≥ 1` on the interval.
    DerivativeBound {
        /// For `k = 1`, `φ′` must be monotone.
        k_one_monotone: bool,
        /// `φ ∈ C²` is accepted in place of monotone `φ′` when `k = 1`.
        c2_alternative: bool,
        /// Only `k = 1` is covered.
        k_one_only: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeReq {
    /// `ψ ∈ L¹(ℝ)`
    Integrable,
    /// `ψ ≡ 1` on the interval (the plain integral of the kernel).
    UnitOnInterval,
    /// `ψ ∈ C¹(I)`
    C1OnInterval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hypotheses {
    pub alpha: AlphaReq,
    pub beta: BetaReq,
    pub domain: DomainReq,
    pub phase: PhaseReq,
    pub amplitude: AmplitudeReq,
}

/// A decay statement together with its executable hypotheses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TheoremSetting {
    pub id: TheoremId,
    pub hypotheses: Hypotheses,
}

const INTERVAL_K: PhaseReq = PhaseReq::DerivativeBound { k_one_monotone: false, c2_alternative: false, k_one_only: false };

impl TheoremSetting {
    /// The registry entry for `id`. `RL` is the interval form; see
    /// [`TheoremSetting::riemann_lebesgue_line`] for the real-line form.
    pub fn new(id: TheoremId) -> Self {
        use AlphaReq::*;
        use AmplitudeReq::*;
        use BetaReq::*;
        let line = |alpha, beta, phase| Hypotheses { alpha, beta, domain: DomainReq::WholeLine, phase, amplitude: Integrable };
        let interval = |beta, phase, amplitude| Hypotheses { alpha: BelowTwo, beta, domain: DomainReq::Interval, phase, amplitude };
        let hypotheses = match id {
            TheoremId::T21i => line(BelowTwo, AtLeastAlphaPlusOne, PhaseReq::InfAbsPositive),
            TheoremId::T21ii => line(BelowTwo, BetweenOneAndAlphaPlusOne, PhaseReq::InfAbsPositive),
            TheoremId::T21iii => line(Two, GreaterThanOne, PhaseReq::InfAbsPositive),
            TheoremId::T22 => line(UpToTwo, One, PhaseReq::InvertibleWithDerivBound),
            TheoremId::T31i => interval(AtLeastAlphaPlusOne, INTERVAL_K, UnitOnInterval),
            TheoremId::T31ii => interval(BetweenOneAndAlphaPlusOne, INTERVAL_K, UnitOnInterval),
            TheoremId::T32i => interval(AtLeastAlphaPlusOne, INTERVAL_K, C1OnInterval),
            TheoremId::T32ii => interval(BetweenOneAndAlphaPlusOne, INTERVAL_K, C1OnInterval),
            TheoremId::T33 => interval(
                EqualsAlpha,
                PhaseReq::DerivativeBound { k_one_monotone: true, c2_alternative: false, k_one_only: false },
                UnitOnInterval,
            ),
            TheoremId::T34 => interval(
                EqualsAlpha,
                PhaseReq::DerivativeBound { k_one_monotone: false, c2_alternative: false, k_one_only: true },
                UnitOnInterval,
            ),
            TheoremId::T35 => interval(
                EqualsAlpha,
                PhaseReq::DerivativeBound { k_one_monotone: true, c2_alternative: true, k_one_only: false },
                C1OnInterval,
            ),
            TheoremId::RL => Hypotheses {
                alpha: BelowTwo,
                beta: AlphaOrAboveOne,
                domain: DomainReq::Interval,
                phase: INTERVAL_K,
                amplitude: C1OnInterval,
            },
        };
        Self { id, hypotheses }
    }

    /// The real-line Riemann-Lebesgue statement (`β = 1`, `f ∈ L¹`).
    pub fn riemann_lebesgue_line() -> Self {
        Self {
            id: TheoremId::RL,
            hypotheses: Hypotheses {
                alpha: AlphaReq::UpToTwo,
                beta: BetaReq::One,
                domain: DomainReq::WholeLine,
                phase: PhaseReq::InvertibleWithDerivBound,
                amplitude: AmplitudeReq::Integrable,
            },
        }
    }

    /// The concrete setting an `RL` statement reduces to; other settings
    /// resolve to themselves.
    pub fn resolve(&self, params: MlParams) -> Result<TheoremSetting> {
        if self.id != TheoremId::RL {
            return Ok(*self);
        }
        if self.hypotheses.domain == DomainReq::WholeLine {
            check_alpha(self, params)?;
            check_beta(self, params)?;
            return Ok(TheoremSetting::new(TheoremId::T22));
        }
        check_alpha(self, params)?;
        check_beta(self, params)?;
        let (a, b) = (params.alpha(), params.beta());
        let id = if b == a {
            TheoremId::T35
        } else if b >= a + 1.0 {
            TheoremId::T32i
        } else if b > 1.0 {
            TheoremId::T32ii
        } else {
            return Err(violation(self, "beta = alpha, beta >= alpha + 1 or 1 < beta < alpha + 1"));
        };
        Ok(TheoremSetting::new(id))
    }

    /// Every hypothesis of the setting as a readable clause.
    pub fn clauses(&self) -> Vec<String> {
        let h = &self.hypotheses;
        let mut out = vec![alpha_clause(h.alpha).to_string(), beta_clause(h.beta).to_string()];
        out.push(match h.domain {
            DomainReq::WholeLine => "domain is the real line".into(),
            DomainReq::Interval => "domain is a finite interval".into(),
        });
        match h.phase {
            PhaseReq::InfAbsPositive => out.push("m = inf |phi| > 0".into()),
            PhaseReq::InvertibleWithDerivBound => {
                out.push("phi invertible".into());
                out.push("m = inf |phi'| > 0".into());
            }
            PhaseReq::DerivativeBound { k_one_monotone, c2_alternative, k_one_only } => {
                out.push("|phi^(k)| >= 1 on I".into());
                if k_one_only {
                    out.push("k = 1".into());
                }
                if k_one_monotone {
                    out.push(if c2_alternative {
                        "k >= 2, or k = 1 with phi' monotone or phi in C^2".into()
                    } else {
                        "k >= 2, or k = 1 with phi' monotone".into()
                    });
                }
            }
        }
        out.push(amplitude_clause(h.amplitude).to_string());
        out.push(SECTOR_CLAUSE.to_string());
        out
    }

    /// Checks every hypothesis; the error names the first failing clause.
    pub fn check(&self, params: MlParams, k: u32, phase: &Phase, amplitude: &Amplitude, domain: &Domain) -> Result<PhaseCert> {
        let resolved = self.resolve(params)?;
        let s = &resolved;
        let h = s.hypotheses;
        check_alpha(s, params)?;
        check_beta(s, params)?;
        check_k(s, k)?;
        match (h.domain, domain) {
            (DomainReq::WholeLine, Domain::WholeLine { .. }) | (DomainReq::Interval, Domain::Interval { .. }) => {}
            (DomainReq::WholeLine, _) => return Err(violation(s, "domain is the real line")),
            (DomainReq::Interval, _) => return Err(violation(s, "domain is a finite interval")),
        }
        phase.validate()?;
        amplitude.validate()?;
        let cert = phase.inspect(k, domain)?;
        match h.phase {
            PhaseReq::InfAbsPositive => {
                if !(cert.inf_abs_phase > 0.0) {
                    return Err(violation(s, "m = inf |phi| > 0"));
                }
            }
            PhaseReq::InvertibleWithDerivBound => {
                if !cert.invertible {
                    return Err(violation(s, "phi invertible"));
                }
                if !(cert.inf_abs_deriv > 0.0) {
                    return Err(violation(s, "m = inf |phi'| > 0"));
                }
            }
            PhaseReq::DerivativeBound { k_one_monotone, c2_alternative, .. } => {
                if cert.inf_abs < 1.0 {
                    let at = cert.witness.map_or("at infinity".to_string(), |w| format!("at x = {w}"));
                    return Err(violation(s, &format!("|phi^({k})| >= 1 on I fails {at} (value {})", cert.inf_abs)));
                }
                // every phase family is C^∞, so the C² alternative always holds
                if k == 1 && k_one_monotone && !c2_alternative && !cert.monotone_deriv {
                    return Err(violation(s, "k >= 2, or k = 1 with phi' monotone"));
                }
            }
        }
        match h.amplitude {
            AmplitudeReq::Integrable => {
                if !amplitude.l1_norm().is_finite() {
                    return Err(violation(s, "psi in L^1(R)"));
                }
            }
            AmplitudeReq::UnitOnInterval => {
                let Domain::Interval { a, b } = *domain else { unreachable!() };
                if !unit_on(amplitude, a, b) {
                    return Err(violation(s, "psi = 1 on I"));
                }
            }
            AmplitudeReq::C1OnInterval => {
                let Domain::Interval { a, b } = *domain else { unreachable!() };
                if !(amplitude.is_c1() || unit_on(amplitude, a, b)) {
                    return Err(violation(s, "psi in C^1(I)"));
                }
            }
        }
        if params.alpha() > 1.0 && !phase_nonnegative(phase, domain)? {
            return Err(violation(s, SECTOR_CLAUSE));
        }
        Ok(cert)
    }
}

/// The kernel `E_{α,β}(i^α λ φ)` stays in the non-growing sector only when
/// `α ≤ 1` or `φ ≥ 0`; for `α > 1` and `φ < 0` it grows exponentially in `λ`.
const SECTOR_CLAUSE: &str = "alpha <= 1 or phi >= 0 (kernel argument in the bounded sector)";

fn alpha_clause(r: AlphaReq) -> &'static str {
    match r {
        AlphaReq::BelowTwo => "0 < alpha < 2",
        AlphaReq::UpToTwo => "0 < alpha <= 2",
        AlphaReq::Two => "alpha = 2",
    }
}

fn beta_clause(r: BetaReq) -> &'static str {
    match r {
        BetaReq::AtLeastAlphaPlusOne => "beta >= alpha + 1",
        BetaReq::BetweenOneAndAlphaPlusOne => "1 < beta < alpha + 1",
        BetaReq::GreaterThanOne => "beta > 1",
        BetaReq::One => "beta = 1",
        BetaReq::EqualsAlpha => "beta = alpha",
        BetaReq::AlphaOrAboveOne => "beta = alpha or beta > 1",
    }
}

fn amplitude_clause(r: AmplitudeReq) -> &'static str {
    match r {
        AmplitudeReq::Integrable => "psi in L^1(R)",
        AmplitudeReq::UnitOnInterval => "psi = 1 on I",
        AmplitudeReq::C1OnInterval => "psi in C^1(I)",
    }
}

fn violation(s: &TheoremSetting, clause: &str) -> Error {
    Error::HypothesisViolation { setting: s.id.to_string(), clause: clause.to_string() }
}

fn check_alpha(s: &TheoremSetting, p: MlParams) -> Result<()> {
    let a = p.alpha();
    let ok = match s.hypotheses.alpha {
        AlphaReq::BelowTwo => a < 2.0,
        AlphaReq::UpToTwo => a <= 2.0,
        AlphaReq::Two => a == 2.0,
    };
    if ok {
        Ok(())
    } else {
        Err(violation(s, alpha_clause(s.hypotheses.alpha)))
    }
}

fn check_beta(s: &TheoremSetting, p: MlParams) -> Result<()> {
    let (a, b) = (p.alpha(), p.beta());
    let ok = match s.hypotheses.beta {
        BetaReq::AtLeastAlphaPlusOne => b >= a + 1.0,
        BetaReq::BetweenOneAndAlphaPlusOne => b > 1.0 && b < a + 1.0,
        BetaReq::GreaterThanOne => b > 1.0,
        BetaReq::One => b == 1.0,
        BetaReq::EqualsAlpha => b == a,
        BetaReq::AlphaOrAboveOne => b == a || b > 1.0,
    };
    if ok {
        Ok(())
    } else {
        Err(violation(s, beta_clause(s.hypotheses.beta)))
    }
}

fn check_k(s: &TheoremSetting, k: u32) -> Result<()> {
    match s.hypotheses.phase {
        PhaseReq::DerivativeBound { k_one_only, .. } => {
            if k == 0 || k > crate::phases::MAX_ORDER {
                return Err(violation(s, "1 <= k <= 8"));
            }
            if k_one_only && k != 1 {
                return Err(violation(s, "k = 1"));
            }
            Ok(())
        }
        _ => Ok(()),
    }
}

/// `ψ ≡ 1` on `[a, b]`.
fn unit_on(amp: &Amplitude, a: f64, b: f64) -> bool {
    match amp {
        Amplitude::One => true,
        Amplitude::Indicator { a: s, b: t } => *s <= a && *t >= b,
        Amplitude::Poly { coeffs } => coeffs[0] == 1.0 && coeffs[1..].iter().all(|&c| c == 0.0),
        _ => false,
    }
}

/// `φ ≥ 0` on the domain, decided from the closed form.
fn phase_nonnegative(phase: &Phase, domain: &Domain) -> Result<bool> {
    let f = phase.derivative(0)?;
    if f.coef == 0.0 || f.power == 0 {
        return Ok(f.eval(0.0) >= 0.0);
    }
    Ok(match *domain {
        Domain::Interval { a, b } => {
            let mut m = f.eval(a).min(f.eval(b));
            if f.shift > a && f.shift < b {
                m = m.min(f.eval(f.shift));
            }
            m >= 0.0
        }
        Domain::WholeLine { .. } => f.power % 2 == 0 && f.coef > 0.0 && f.constant >= 0.0,
    })
}

/// What the rate is a power of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateBase {
    Lambda,
    OnePlusLambdaM,
    LambdaM,
}

/// The amplitude factor multiplying the rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmplitudeFactor {
    /// No amplitude in the statement (`ψ ≡ 1`).
    Unit,
    /// `‖ψ‖_{L¹(ℝ)}`
    L1Norm,
    /// `|ψ(b)| + ∫_I |ψ′|`
    BoundaryVariation,
}

impl AmplitudeFactor {
    pub fn describe(self) -> &'static str {
        match self {
            AmplitudeFactor::Unit => "1",
            AmplitudeFactor::L1Norm => "||psi||_L1(R)",
            AmplitudeFactor::BoundaryVariation => "|psi(b)| + int_I |psi'|",
        }
    }

    pub fn value(self, amp: &Amplitude, domain: &Domain) -> f64 {
        match (self, domain) {
            (AmplitudeFactor::Unit, _) => 1.0,
            (AmplitudeFactor::L1Norm, _) => amp.l1_norm(),
            (AmplitudeFactor::BoundaryVariation, Domain::Interval { a, b }) => {
                if unit_on(amp, *a, *b) {
                    1.0
                } else {
                    amp.boundary_functional(*a, *b)
                }
            }
            (AmplitudeFactor::BoundaryVariation, Domain::WholeLine { .. }) => f64::NAN,
        }
    }
}

/// `base^{−exponent} · log^{log_power}(1+λ) · (1+λ)^{growth_correction}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRate {
    pub exponent: f64,
    pub log_power: f64,
    pub growth_correction: f64,
    pub base: RateBase,
    pub constant_functional: AmplitudeFactor,
}

impl DecayRate {
    fn power(exponent: f64, base: RateBase, factor: AmplitudeFactor) -> Self {
        Self { exponent, log_power: 0.0, growth_correction: 0.0, base, constant_functional: factor }
    }

    pub fn base_value(&self, lambda: f64, m: f64) -> f64 {
        match self.base {
            RateBase::Lambda => lambda,
            RateBase::OnePlusLambdaM => 1.0 + lambda * m,
            RateBase::LambdaM => lambda * m,
        }
    }

    /// The slowly varying part divided out before fitting.
    pub fn correction(&self, lambda: f64) -> f64 {
        let mut c = 1.0;
        if self.log_power != 0.0 {
            c *= lambda.ln_1p().powf(self.log_power);
        }
        if self.growth_correction != 0.0 {
            c *= (1.0 + lambda).powf(self.growth_correction);
        }
        c
    }

    /// The rate with constant 1; `m` is ignored for a `λ` base.
    pub fn envelope(&self, lambda: f64, m: f64) -> f64 {
        self.base_value(lambda, m).powf(-self.exponent) * self.correction(lambda)
    }

    /// Net power of `λ` for large `λ`, ignoring logarithms.
    pub fn effective_exponent(&self) -> f64 {
        self.exponent - self.growth_correction
    }
}

/// The predicted rate of `setting` at `(α, β)` and derivative order `k`.
/// `k` is ignored by the real-line settings. An `RL` setting is resolved to
/// the statement it reduces to first.
pub fn theoretical_rate(params: MlParams, k: u32, setting: &TheoremSetting) -> Result<DecayRate> {
    let s = setting.resolve(params)?;
    check_alpha(&s, params)?;
    check_beta(&s, params)?;
    check_k(&s, k)?;
    let (a, b) = (params.alpha(), params.beta());
    let kf = k as f64;
    use AmplitudeFactor::*;
    use RateBase::*;
    Ok(match s.id {
        TheoremId::T21i => DecayRate::power(1.0, OnePlusLambdaM, L1Norm),
        TheoremId::T21ii => DecayRate::power((b - 1.0) / a, OnePlusLambdaM, L1Norm),
        TheoremId::T21iii => DecayRate::power((b - 1.0) / 2.0, OnePlusLambdaM, L1Norm),
        TheoremId::T22 => DecayRate::power(1.0, LambdaM, L1Norm),
        TheoremId::T31i | TheoremId::T32i => DecayRate {
            log_power: 1.0 / kf,
            ..DecayRate::power(1.0 / kf, Lambda, if s.id == TheoremId::T31i { Unit } else { BoundaryVariation })
        },
        TheoremId::T31ii | TheoremId::T32ii => DecayRate {
            growth_correction: (a + 1.0 - b) / (a * kf),
            ..DecayRate::power(1.0 / kf, Lambda, if s.id == TheoremId::T31ii { Unit } else { BoundaryVariation })
        },
        TheoremId::T33 => DecayRate::power(1.0 / kf, Lambda, Unit),
        TheoremId::T34 => DecayRate::power(1.0, Lambda, Unit),
        TheoremId::T35 => DecayRate::power(1.0 / kf, Lambda, BoundaryVariation),
        TheoremId::RL => unreachable!("resolved above"),
    })
}
