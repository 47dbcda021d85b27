//! Arbitrary-precision evaluation of the defining power series
//! `E_{α,β}(z) = Σ z^k / Γ(αk+β)`.
//!
//! Terms are summed in MPFR arithmetic at a working precision of
//! `digits + guard` decimal digits, where the guard covers the cancellation
//! between the largest term and the sum. The summation stops once the
//! geometric tail bound (valid past the ratio peak, where the term ratio
//! `|z| Γ(x)/Γ(x+α)` is decreasing) drops below `10^-(digits+3)·|sum|`. The
//! achieved precision is checked after the fact; if the cancellation turned
//! out larger than the guard the sum is recomputed with a wider guard.

use num_complex::Complex64;
use rug::ops::CompleteRound;
use rug::Float;

use super::params::MlParams;
use crate::error::{Error, Result};
use statrs::function::gamma::ln_gamma;

/// Default cap on the cancellation guard (decimal digits).
pub const DEFAULT_GUARD_CAP: u32 = 1200;

const MAX_TERMS: usize = 2_000_000;
const LN10: f64 = std::f64::consts::LN_10;

/// Outcome of one extended-precision summation.
#[derive(Debug, Clone, Copy)]
pub struct MpSum {
    pub value: Complex64,
    /// log10 of (largest term / |sum|).
    pub loss_digits: f64,
    pub terms: usize,
    pub guard_digits: u32,
}

/// The independent verification oracle: `digits ≥ 50`, `|z| ≤ 10³`.
pub fn ml_eval_oracle(params: MlParams, z: Complex64, digits: u32) -> Result<Complex64> {
    ml_eval_oracle_with_cap(params, z, digits, DEFAULT_GUARD_CAP)
}

pub fn ml_eval_oracle_with_cap(
    params: MlParams,
    z: Complex64,
    digits: u32,
    guard_cap: u32,
) -> Result<Complex64> {
    if digits < 50 {
        return Err(Error::InvalidParams(format!("oracle needs digits >= 50, got {digits}")));
    }
    if !(z.norm() <= 1e3) {
        return Err(Error::InvalidParams(format!("oracle domain is |z| <= 1e3, got |z| = {}", z.norm())));
    }
    series_mp(params, z, digits, guard_cap).map(|s| s.value)
}

/// Guard digits from the size of the series: `⌈|z|^{1/α} log10 e⌉`, which is
/// the log10 of the peak term for large `|z|` (and `⌈|z| log10 e⌉` at α = 1).
pub fn cancellation_guard(alpha: f64, abs_z: f64) -> f64 {
    (abs_z.powf(1.0 / alpha) * std::f64::consts::LOG10_E).ceil()
}

/// Extended-precision series with `digits` significant digits targeted.
pub fn series_mp(params: MlParams, z: Complex64, digits: u32, guard_cap: u32) -> Result<MpSum> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::InvalidParams(format!("non-finite argument {z}")));
    }
    if z.norm() == 0.0 {
        let rg = rgamma_exact(params.beta());
        return Ok(MpSum { value: Complex64::new(rg, 0.0), loss_digits: 0.0, terms: 1, guard_digits: 0 });
    }
    let guard = cancellation_guard(params.alpha(), z.norm());
    if guard > guard_cap as f64 {
        return Err(Error::PrecisionExhausted { needed: guard.min(u32::MAX as f64) as u32, cap: guard_cap });
    }
    let mut guard = guard as u32;
    let first = sum_at(params, z, digits, guard)?;
    let achieved = (digits + guard) as f64 - first.loss_digits;
    if achieved >= digits as f64 + 1.0 {
        return finish(first, z);
    }
    let needed = (first.loss_digits.ceil() as u32).saturating_add(5);
    if needed > guard_cap {
        return Err(Error::PrecisionExhausted { needed, cap: guard_cap });
    }
    guard = needed.max(guard + 5);
    let second = sum_at(params, z, digits, guard)?;
    finish(second, z)
}

fn finish(sum: MpSum, z: Complex64) -> Result<MpSum> {
    if sum.value.re.is_finite() && sum.value.im.is_finite() {
        Ok(sum)
    } else {
        Err(Error::NonFinite { z, regime: "extended-precision series".into() })
    }
}

/// ln|a + ib| for MPFR components without overflow.
fn ln_abs(re: &Float, im: &Float) -> f64 {
    fn ln_one(x: &Float) -> f64 {
        if x.is_zero() {
            return f64::NEG_INFINITY;
        }
        let (m, e) = x.to_f64_exp();
        m.abs().ln() + e as f64 * std::f64::consts::LN_2
    }
    let a = ln_one(re);
    let b = ln_one(im);
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + 0.5 * (2.0 * (lo - hi)).exp().ln_1p()
}

/// `α = p/q` with `q` a small power of two, so that `α·q` is exact in binary
/// and the recurrence reproduces the same arguments as direct evaluation.
fn small_rational(alpha: f64) -> Option<(u32, u32)> {
    for q in [1u32, 2, 4, 8, 16] {
        let p = alpha * q as f64;
        if p == p.round() && p >= 1.0 && p <= 32.0 {
            return Some((p as u32, q));
        }
    }
    None
}

fn sum_at(params: MlParams, z: Complex64, digits: u32, guard: u32) -> Result<MpSum> {
    let alpha = params.alpha();
    let beta = params.beta();
    let abs_z = z.norm();
    let ln_abs_z = abs_z.ln();

    // Rough term count for the precision padding.
    let k_est = if abs_z > 0.0 {
        (3.0 * abs_z.powf(1.0 / alpha) / alpha + 200.0).min(MAX_TERMS as f64)
    } else {
        1.0
    };
    let prec = (((digits + guard + 8) as f64) * LN10 / std::f64::consts::LN_2
        + k_est.log2()
        + 16.0)
        .ceil() as u32;

    let zr = Float::with_val(prec, z.re);
    let zi = Float::with_val(prec, z.im);
    let mut pr = Float::with_val(prec, 1);
    let mut pi = Float::with_val(prec, 0);
    let mut sr = Float::with_val(prec, 0);
    let mut si = Float::with_val(prec, 0);
    let alpha_mp = Float::with_val(prec, alpha);
    let beta_mp = Float::with_val(prec, beta);

    let rational = small_rational(alpha);
    // Ring buffer of (x_k, 1/Γ(x_k)) for the recurrence Γ(x+p) = Γ(x)·x(x+1)…(x+p-1).
    let q = rational.map(|(_, q)| q as usize).unwrap_or(0);
    let mut ring: Vec<Option<(Float, Float)>> = vec![None; q.max(1)];

    let mut max_ln_term = f64::NEG_INFINITY;
    let mut k: usize = 0;
    let tail_digits = (digits + 3) as f64 * LN10;
    let floor_digits = (digits + guard + 6) as f64 * LN10;
    loop {
        if k > MAX_TERMS {
            return Err(Error::PrecisionExhausted { needed: guard, cap: guard });
        }
        let kf = k as f64;
        let x = alpha_mp.clone() * kf + &beta_mp;
        let xf = alpha * kf + beta;

        let rg = if x.is_integer() && x <= 0 {
            Float::with_val(prec, 0)
        } else {
            let from_ring = match rational {
                Some((p, _)) if k >= q => ring[k % q].as_ref().and_then(|(xq, rq)| {
                    if *xq > 0 {
                        let mut prod = Float::with_val(prec, 1);
                        for j in 0..p {
                            prod *= (xq + j).complete(prec);
                        }
                        Some(Float::with_val(prec, rq / &prod))
                    } else {
                        None
                    }
                }),
                _ => None,
            };
            match from_ring {
                Some(v) => v,
                None => {
                    let g = x.clone().gamma();
                    Float::with_val(prec, 1) / g
                }
            }
        };
        if q > 0 {
            ring[k % q] = Some((x.clone(), rg.clone()));
        }

        let tr = Float::with_val(prec, &pr * &rg);
        let ti = Float::with_val(prec, &pi * &rg);
        let ln_t = ln_abs(&tr, &ti);
        sr += &tr;
        si += &ti;
        if ln_t > max_ln_term {
            max_ln_term = ln_t;
        }

        if abs_z == 0.0 {
            break;
        }

        // Geometric tail bound once the term ratio is below one and decreasing.
        if xf > 0.0 && ln_t.is_finite() {
            let ratio = (ln_abs_z + ln_gamma(xf) - ln_gamma(xf + alpha)).exp() * (1.0 + 1e-10);
            if ratio < 1.0 {
                let ln_tail = ln_t + ratio.ln() - (1.0 - ratio).ln();
                let ln_s = ln_abs(&sr, &si);
                // both: the partial sum may still be far from the final (cancelled) value
                if ln_tail < ln_s - tail_digits && ln_tail < max_ln_term - floor_digits {
                    break;
                }
            }
        }
        // next power z^{k+1}
        let nr = Float::with_val(prec, &pr * &zr) - Float::with_val(prec, &pi * &zi);
        let ni = Float::with_val(prec, &pr * &zi) + Float::with_val(prec, &pi * &zr);
        pr = nr;
        pi = ni;
        k += 1;
    }

    let ln_s = ln_abs(&sr, &si);
    let loss_digits = if ln_s.is_finite() {
        ((max_ln_term - ln_s) / LN10).max(0.0)
    } else {
        f64::INFINITY
    };
    let value = Complex64::new(sr.to_f64(), si.to_f64());
    Ok(MpSum { value, loss_digits, terms: k + 1, guard_digits: guard })
}

fn rgamma_exact(x: f64) -> f64 {
    let xf = Float::with_val(256, x);
    if xf.is_integer() && x <= 0.0 {
        return 0.0;
    }
    (Float::with_val(256, 1) / xf.gamma()).to_f64()
}

/// Returns `Γ(x)` at high precision rounded to f64; used by tests that need an
/// independent gamma value.
pub fn gamma_mp(x: f64) -> f64 {
    Float::with_val(256, x).gamma().to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(a: f64, b: f64) -> MlParams {
        MlParams::new(a, b).unwrap()
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    #[test]
    fn exp_with_heavy_cancellation() {
        let v = ml_eval_oracle(p(1.0, 1.0), Complex64::new(-30.0, 0.0), 50).unwrap();
        let expected = (-30.0f64).exp();
        assert!(rel(v, Complex64::new(expected, 0.0)) < 1e-15, "{v}");
        assert!((v.re - 9.357622968840175e-14).abs() < 1e-27);
    }

    #[test]
    fn sin_over_w() {
        let v = ml_eval_oracle(p(2.0, 2.0), Complex64::new(-4.0, 0.0), 50).unwrap();
        let expected = 2.0f64.sin() / 2.0;
        assert!((v.re - expected).abs() < 1e-16);
        assert!((v.re - 0.4546487134128409).abs() < 1e-15);
    }

    #[test]
    fn half_order_identity() {
        // E_{1/2,1/2}(w) = w·E_{1/2,1}(w) + 1/Γ(1/2)
        let w = Complex64::new(1.0, 0.0);
        let lhs = ml_eval_oracle(p(0.5, 0.5), w, 50).unwrap();
        let rhs = w * ml_eval_oracle(p(0.5, 1.0), w, 50).unwrap()
            + Complex64::new(1.0 / std::f64::consts::PI.sqrt(), 0.0);
        assert!(rel(lhs, rhs) < 1e-15);
        // E_{1/2,1}(w) = exp(w²) erfc(-w), erf(1) to 20 digits
        let e = (1.0f64).exp() * (1.0 + 0.842_700_792_949_714_869_3);
        let v = ml_eval_oracle(p(0.5, 1.0), w, 50).unwrap();
        assert!((v.re - e).abs() < 1e-13 * e);
    }

    #[test]
    fn zero_argument_gives_reciprocal_gamma() {
        let v = ml_eval_oracle(p(0.7, 1.3), Complex64::new(0.0, 0.0), 50).unwrap();
        assert!((v.re - 1.0 / gamma_mp(1.3)).abs() < 1e-16);
        // pole of Γ: 1/Γ(0) = 0
        let v = ml_eval_oracle(p(0.7, 0.0), Complex64::new(0.0, 0.0), 50).unwrap();
        assert_eq!(v.re, 0.0);
    }

    #[test]
    fn recurrence_and_direct_gamma_agree() {
        // α = 0.75 takes the rational recurrence; α = 0.75 + 2^-40 cannot.
        let z = Complex64::new(3.0, -2.0);
        let a = ml_eval_oracle(p(0.75, 1.2), z, 50).unwrap();
        let b = ml_eval_oracle(p(0.75 + 2f64.powi(-40), 1.2), z, 50).unwrap();
        assert!(rel(a, b) < 1e-10);
    }

    #[test]
    fn guard_cap_is_enforced() {
        let err = ml_eval_oracle(p(0.25, 1.0), Complex64::new(0.0, 100.0), 50).unwrap_err();
        assert!(matches!(err, Error::PrecisionExhausted { .. }));
        assert!(ml_eval_oracle(p(1.0, 1.0), Complex64::new(1.0, 0.0), 20).is_err());
    }
}
