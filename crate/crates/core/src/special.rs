//! Real gamma-function helpers, correctly rounded via MPFR.
//!
//! The Mittag-Leffler machinery needs `1/Γ(x)` as an entire function (zero at
//! the poles of Γ) and a signed `ln|Γ(x)|` for arguments far outside the range
//! where `Γ` itself is representable.

use std::cmp::Ordering;
use std::f64::consts::PI;

use rug::Float;

const PREC: u32 = 128;

/// `sin(πx)`, exact zero at integers.
pub fn sin_pi(x: f64) -> f64 {
    if !x.is_finite() {
        return f64::NAN;
    }
    let r = x - 2.0 * (x / 2.0).floor();
    if r == 0.0 || r == 1.0 {
        return 0.0;
    }
    if r == 0.5 {
        return 1.0;
    }
    if r == 1.5 {
        return -1.0;
    }
    if r < 0.5 {
        (PI * r).sin()
    } else if r < 1.5 {
        -(PI * (r - 1.0)).sin()
    } else {
        -(PI * (2.0 - r)).sin()
    }
}

/// True if `x` is a pole of Γ (0, -1, -2, ...).
pub fn is_gamma_pole(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

/// `(ln|Γ(x)|, sign Γ(x))`. At a pole the log is `+inf` and the sign is 0.
pub fn ln_gamma_signed(x: f64) -> (f64, f64) {
    if is_gamma_pole(x) {
        return (f64::INFINITY, 0.0);
    }
    let (lg, ord) = Float::with_val(PREC, x).ln_abs_gamma();
    let sign = if ord == Ordering::Less { -1.0 } else { 1.0 };
    (lg.to_f64(), sign)
}

/// Reciprocal gamma `1/Γ(x)`, an entire function: returns 0 at the poles.
pub fn rgamma(x: f64) -> f64 {
    if is_gamma_pole(x) {
        return 0.0;
    }
    let g = Float::with_val(PREC, x).gamma();
    if g.is_finite() && !g.is_zero() {
        return (Float::with_val(PREC, 1) / g).to_f64();
    }
    let (lg, sign) = ln_gamma_signed(x);
    sign * (-lg).exp()
}

pub fn gamma_fn(x: f64) -> f64 {
    if is_gamma_pole(x) {
        return f64::NAN;
    }
    Float::with_val(PREC, x).gamma().to_f64()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rgamma_vanishes_at_poles() {
        for n in 0..20 {
            assert_eq!(rgamma(-(n as f64)), 0.0);
        }
    }

    #[test]
    fn rgamma_known_values() {
        assert!((rgamma(1.0) - 1.0).abs() < 1e-15);
        assert!((rgamma(0.5) - 1.0 / PI.sqrt()).abs() < 1e-15);
        // Γ(-0.5) = -2√π
        assert!((rgamma(-0.5) + 1.0 / (2.0 * PI.sqrt())).abs() < 1e-15);
        // Γ(-1.5) = 4√π/3
        assert!((rgamma(-1.5) - 3.0 / (4.0 * PI.sqrt())).abs() < 1e-15);
        assert!((rgamma(6.0) - 1.0 / 120.0).abs() < 1e-17);
    }

    #[test]
    fn signed_log_gamma_matches_reflection() {
        for &x in &[-0.3, -1.7, -2.5, -7.25] {
            let (lg, s) = ln_gamma_signed(x);
            let direct = gamma_fn(x);
            assert_eq!(s, direct.signum());
            assert!((lg - direct.abs().ln()).abs() < 1e-12, "x = {x}");
        }
    }

    #[test]
    fn sin_pi_exact_points() {
        assert_eq!(sin_pi(3.0), 0.0);
        assert_eq!(sin_pi(-4.0), 0.0);
        assert_eq!(sin_pi(0.5), 1.0);
        assert_eq!(sin_pi(-0.5), -1.0);
        assert!((sin_pi(0.25) - (PI / 4.0).sin()).abs() < 1e-16);
        assert!((sin_pi(-1.25) - (-1.25 * PI).sin()).abs() < 1e-15);
    }
}
