use std::f64::consts::PI;

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::integrate_real;

/// `∫_{-1}^{1} exp(−1/(1−u²)) du`.
pub const BUMP_INTEGRAL: f64 = 0.443_993_816_168_079_4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Amplitude {
    One,
    /// `1` on `[a, b]`, `0` elsewhere.
    Indicator { a: f64, b: f64 },
    /// `exp(−x²/(2σ²))`
    Gaussian { sigma: f64 },
    /// `Σ coeffs[i]·x^i`
    Poly { coeffs: Vec<f64> },
    /// `exp(−1/(1−u²))` with `u` the position rescaled from `[a, b]` to `[−1, 1]`.
    SmoothBump { a: f64, b: f64 },
}

fn erf(x: f64) -> f64 {
    Float::with_val(64, x).erf().to_f64()
}

fn erfc(x: f64) -> f64 {
    Float::with_val(64, x).erfc().to_f64()
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

fn poly_deriv(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(i, &ci)| i as f64 * ci).collect()
}

fn poly_antideriv(c: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0];
    out.extend(c.iter().enumerate().map(|(i, &ci)| ci / (i as f64 + 1.0)));
    out
}

/// Roots of a polynomial strictly inside `(a, b)`, by isolating monotone
/// pieces between the roots of the derivative.
fn poly_roots_in(c: &[f64], a: f64, b: f64) -> Vec<f64> {
    let deg = c.iter().rposition(|&v| v != 0.0).unwrap_or(0);
    if deg == 0 {
        return vec![];
    }
    let c = &c[..=deg];
    let mut knots = vec![a];
    knots.extend(poly_roots_in(&poly_deriv(c), a, b));
    knots.push(b);
    let mut roots = Vec::new();
    for w in knots.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (poly_eval(c, lo), poly_eval(c, hi));
        if flo == 0.0 && lo > a {
            roots.push(lo);
            continue;
        }
        if flo * fhi >= 0.0 {
            continue;
        }
        for _ in 0..200 {
            let m = 0.5 * (lo + hi);
            if m <= lo || m >= hi {
                break;
            }
            if (poly_eval(c, m) > 0.0) == (flo > 0.0) {
                lo = m;
            } else {
                hi = m;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    roots.dedup();
    roots
}

impl Amplitude {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            Amplitude::One => true,
            Amplitude::Indicator { a, b } | Amplitude::SmoothBump { a, b } => a.is_finite() && b.is_finite() && a < b,
            Amplitude::Gaussian { sigma } => sigma.is_finite() && *sigma > 0.0,
            Amplitude::Poly { coeffs } => !coeffs.is_empty() && coeffs.iter().all(|c| c.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!("invalid amplitude {self}")))
        }
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            Amplitude::One => 1.0,
            Amplitude::Indicator { a, b } => {
                if x >= *a && x <= *b {
                    1.0
                } else {
                    0.0
                }
            }
            Amplitude::Gaussian { sigma } => (-x * x / (2.0 * sigma * sigma)).exp(),
            Amplitude::Poly { coeffs } => poly_eval(coeffs, x),
            Amplitude::SmoothBump { a, b } => {
                let u = (2.0 * x - a - b) / (b - a);
                if u.abs() >= 1.0 {
                    0.0
                } else {
                    (-1.0 / (1.0 - u * u)).exp()
                }
            }
        }
    }

    /// `ψ′(x)`; for the indicator this is the a.e. derivative 0.
    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            Amplitude::One | Amplitude::Indicator { .. } => 0.0,
            Amplitude::Gaussian { sigma } => -x / (sigma * sigma) * self.value(x),
            Amplitude::Poly { coeffs } => poly_eval(&poly_deriv(coeffs), x),
            Amplitude::SmoothBump { a, b } => {
                let u = (2.0 * x - a - b) / (b - a);
                if u.abs() >= 1.0 {
                    return 0.0;
                }
                let s = 1.0 - u * u;
                self.value(x) * (-2.0 * u / (s * s)) * 2.0 / (b - a)
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Amplitude::Poly { coeffs } if coeffs.iter().all(|&c| c == 0.0))
    }

    /// `ψ ∈ C¹(ℝ)`.
    pub fn is_c1(&self) -> bool {
        !matches!(self, Amplitude::Indicator { .. })
    }

    /// Closed interval outside which `ψ` vanishes, if any.
    pub fn support(&self) -> Option<(f64, f64)> {
        match self {
            Amplitude::Indicator { a, b } | Amplitude::SmoothBump { a, b } => Some((*a, *b)),
            _ if self.is_zero() => Some((0.0, 0.0)),
            _ => None,
        }
    }

    /// `‖ψ‖_{L¹(ℝ)}`, infinite when `ψ ∉ L¹`.
    pub fn l1_norm(&self) -> f64 {
        match self {
            Amplitude::One => f64::INFINITY,
            Amplitude::Indicator { a, b } => b - a,
            Amplitude::Gaussian { sigma } => sigma * (2.0 * PI).sqrt(),
            Amplitude::Poly { .. } => {
                if self.is_zero() {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            Amplitude::SmoothBump { a, b } => 0.5 * (b - a) * BUMP_INTEGRAL,
        }
    }

    /// `∫_a^b |ψ|`.
    pub fn l1_norm_on(&self, a: f64, b: f64) -> f64 {
        match self {
            Amplitude::One => b - a,
            Amplitude::Indicator { a: s, b: t } => (b.min(*t) - a.max(*s)).max(0.0),
            Amplitude::Gaussian { sigma } => {
                let r = sigma * std::f64::consts::SQRT_2;
                sigma * (PI / 2.0).sqrt() * (erf(b / r) - erf(a / r))
            }
            Amplitude::Poly { coeffs } => {
                let anti = poly_antideriv(coeffs);
                let mut knots = vec![a];
                knots.extend(poly_roots_in(coeffs, a, b));
                knots.push(b);
                knots.windows(2).map(|w| (poly_eval(&anti, w[1]) - poly_eval(&anti, w[0])).abs()).sum()
            }
            Amplitude::SmoothBump { a: s, b: t } => {
                let (lo, hi) = (a.max(*s), b.min(*t));
                if lo >= hi {
                    return 0.0;
                }
                if lo == *s && hi == *t {
                    return self.l1_norm();
                }
                integrate_real(|x| self.value(x), lo, hi, 1e-15 * (t - s), 10_000).0
            }
        }
    }

    /// `∫_{|x|>R} |ψ|`.
    pub fn tail_mass(&self, radius: f64) -> f64 {
        match self {
            Amplitude::Gaussian { sigma } => sigma * (2.0 * PI).sqrt() * erfc(radius / (sigma * std::f64::consts::SQRT_2)),
            Amplitude::Indicator { .. } | Amplitude::SmoothBump { .. } => {
                let (a, b) = self.support().unwrap();
                self.l1_norm_on(a.min(-radius), (-radius).min(b)) + self.l1_norm_on(a.max(radius), b.max(radius))
            }
            _ => {
                if self.is_zero() {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Smallest `R` with `tail_mass(R) ≤ limit`, if one exists in closed form.
    pub fn truncation_radius(&self, limit: f64) -> Option<f64> {
        match self {
            Amplitude::Gaussian { sigma } => {
                let ratio = (2.0 * self.l1_norm() / limit).max(1.0);
                Some(sigma * (2.0 * ratio.ln()).sqrt())
            }
            _ => self.support().map(|(a, b)| a.abs().max(b.abs())),
        }
    }

    /// Points in `(a, b)` where `ψ′` changes sign.
    fn critical_points(&self, a: f64, b: f64) -> Vec<f64> {
        let inside = |x: f64| x > a && x < b;
        match self {
            Amplitude::One | Amplitude::Indicator { .. } => vec![],
            Amplitude::Gaussian { .. } => [0.0].into_iter().filter(|&x| inside(x)).collect(),
            Amplitude::SmoothBump { a: s, b: t } => {
                [*s, 0.5 * (s + t), *t].into_iter().filter(|&x| inside(x)).collect()
            }
            Amplitude::Poly { coeffs } => poly_roots_in(&poly_deriv(coeffs), a, b),
        }
    }

    /// `∫_a^b |ψ′|`, summed over monotone pieces.
    pub fn total_variation(&self, a: f64, b: f64) -> f64 {
        let mut knots = vec![a];
        knots.extend(self.critical_points(a, b));
        knots.push(b);
        knots.windows(2).map(|w| (self.value(w[1]) - self.value(w[0])).abs()).sum()
    }

    /// `|ψ(b)| + ∫_a^b |ψ′|`.
    pub fn boundary_functional(&self, a: f64, b: f64) -> f64 {
        self.value(b).abs() + self.total_variation(a, b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn quad(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        integrate_real(f, a, b, 1e-14, 100_000).0
    }

    #[test]
    fn bump_constant() {
        let v = quad(|u| if u.abs() < 1.0 { (-1.0 / (1.0 - u * u)).exp() } else { 0.0 }, -1.0, 1.0);
        assert!((v - BUMP_INTEGRAL).abs() < 1e-14);
    }

    #[test]
    fn l1_norms_match_quadrature() {
        let g = Amplitude::Gaussian { sigma: 1.3 };
        let q = quad(|x| g.value(x), -20.0, 20.0);
        assert!((g.l1_norm() - q).abs() < 1e-10);
        let b = Amplitude::SmoothBump { a: -0.5, b: 2.0 };
        assert!((b.l1_norm() - quad(|x| b.value(x), -0.5, 2.0)).abs() < 1e-10);
        let p = Amplitude::Poly { coeffs: vec![-0.3, 0.0, 1.0, -0.5] };
        assert!((p.l1_norm_on(-1.0, 2.0) - quad(|x| p.value(x).abs(), -1.0, 2.0)).abs() < 1e-10);
        assert!((g.l1_norm_on(-0.3, 1.1) - quad(|x| g.value(x), -0.3, 1.1)).abs() < 1e-12);
        assert_eq!(Amplitude::Poly { coeffs: vec![0.0] }.l1_norm(), 0.0);
        assert!(Amplitude::One.l1_norm().is_infinite());
    }

    #[test]
    fn boundary_functional_values() {
        // ψ = 1 + x² on [−1, 2]: ψ(2) = 5, variation 1 + 4
        let p = Amplitude::Poly { coeffs: vec![1.0, 0.0, 1.0] };
        assert!((p.boundary_functional(-1.0, 2.0) - 10.0).abs() < 1e-14);
        let b = Amplitude::SmoothBump { a: 0.0, b: 1.0 };
        assert!((b.boundary_functional(0.0, 1.0) - 2.0 * (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(Amplitude::One.boundary_functional(0.0, 1.0), 1.0);
    }

    #[test]
    fn gaussian_tail_and_radius() {
        let g = Amplitude::Gaussian { sigma: 1.0 };
        let r = g.truncation_radius(1e-9).unwrap();
        assert!(g.tail_mass(r) <= 1e-9);
        let b = Amplitude::SmoothBump { a: 0.0, b: 1.0 };
        assert_eq!(b.tail_mass(1.0), 0.0);
        assert!((b.tail_mass(0.5) - 0.5 * b.l1_norm()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn derivative_matches_finite_difference(sigma in 0.3..3.0f64, x in -3.0..3.0f64) {
            let g = Amplitude::Gaussian { sigma };
            let h = 1e-5;
            let fd = (g.value(x + h) - g.value(x - h)) / (2.0 * h);
            prop_assert!((fd - g.derivative(x)).abs() < 1e-7 / (sigma * sigma * sigma));
            let b = Amplitude::SmoothBump { a: -1.0, b: 2.0 };
            let y = x / 2.0;
            let fd = (b.value(y + h) - b.value(y - h)) / (2.0 * h);
            prop_assert!((fd - b.derivative(y)).abs() < 1e-6);
        }

        #[test]
        fn poly_total_variation_vs_sampling(c in proptest::collection::vec(-2.0..2.0f64, 1..5)) {
            let p = Amplitude::Poly { coeffs: c };
            let n = 20_000;
            let mut tv = 0.0;
            for i in 0..n {
                let (x0, x1) = (-1.0 + 3.0 * i as f64 / n as f64, -1.0 + 3.0 * (i + 1) as f64 / n as f64);
                tv += (p.value(x1) - p.value(x0)).abs();
            }
            let exact = p.total_variation(-1.0, 2.0);
            prop_assert!(tv <= exact * (1.0 + 1e-12) + 1e-12);
            prop_assert!(exact - tv <= 1e-6 * (1.0 + exact));
        }
    }
}
