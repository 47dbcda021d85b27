//! Minimal double-double arithmetic (about 106 bits) for the exponent of the
//! asymptotic expansion, where `|ζ|` multiplies every absolute error in the
//! phase.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const PI: Dd = Dd { hi: std::f64::consts::PI, lo: 1.2246467991473532e-16 };
const FRAC_PI_2: Dd = Dd { hi: std::f64::consts::FRAC_PI_2, lo: 6.123233995736766e-17 };
const TAU: Dd = Dd { hi: std::f64::consts::TAU, lo: 2.4492935982947064e-16 };
const LN2: Dd = Dd { hi: std::f64::consts::LN_2, lo: 2.3190468138462996e-17 };

#[inline]
fn two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    let bb = s - a;
    Dd { hi: s, lo: (a - (s - bb)) + (b - bb) }
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> Dd {
    let s = a + b;
    Dd { hi: s, lo: b - (s - a) }
}

#[inline]
fn two_prod(a: f64, b: f64) -> Dd {
    let p = a * b;
    Dd { hi: p, lo: a.mul_add(b, -p) }
}

impl Dd {
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn new(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn scale(self, k: i32) -> Self {
        let f = 2f64.powi(k);
        Dd { hi: self.hi * f, lo: self.lo * f }
    }

    fn mul_f64(self, b: f64) -> Self {
        let p = two_prod(self.hi, b);
        quick_two_sum(p.hi, p.lo + self.lo * b)
    }

    fn sqr(self) -> Self {
        self * self
    }

    fn div_f64(self, b: f64) -> Self {
        let q1 = self.hi / b;
        let r = self - two_prod(q1, b);
        let q2 = r.hi / b;
        let r = r - two_prod(q2, b);
        quick_two_sum(q1, q2) + Dd::new(r.hi / b)
    }

    /// `e^a`; valid while the result is a normal f64.
    pub fn exp(self) -> Self {
        let k = (self.hi / LN2.hi).round();
        let r = (self - LN2.mul_f64(k)).scale(-9);
        // e^r − 1 with |r| < 7e-4: four double-double terms, the rest is
        // below 1e-18 and f64 carries it
        let x = r.hi;
        let tail = (5..=11).rev().fold(0.0, |acc, n| (acc + 1.0) * x / n as f64) * x.powi(4) / 24.0;
        let r2 = r.sqr();
        let r3 = r2 * r;
        let mut sum = r + r2.scale(-1) + r3.div_f64(6.0) + (r3 * r).div_f64(24.0) + Dd::new(tail);
        for _ in 0..9 {
            sum = sum.scale(1) + sum.sqr();
        }
        (sum + Dd::ONE).scale(k as i32)
    }

    /// `ln a` for `a > 0`: one Newton step from the f64 logarithm.
    pub fn ln(self) -> Self {
        let y0 = Dd::new(self.hi.ln());
        y0 + self * (-y0).exp() - Dd::ONE
    }

    /// `(sin a, cos a)` for moderate `|a|`.
    pub fn sin_cos(self) -> (Self, Self) {
        let q = (self.hi / FRAC_PI_2.hi).round();
        // |r| ≤ π/32 after three halvings, undone by double-angle formulas
        let r = (self - FRAC_PI_2.mul_f64(q)).scale(-3);
        let r2 = r.sqr();
        let x = r.hi;
        let x2 = x * x;
        let mut s = r;
        let mut c = Dd::ONE - r2.scale(-1);
        let mut ts = r;
        let mut tc = r2.scale(-1);
        for n in 2..=5 {
            let n = n as f64;
            ts = (ts * r2).div_f64(-(2.0 * n - 2.0) * (2.0 * n - 1.0));
            tc = (tc * r2).div_f64(-(2.0 * n - 1.0) * (2.0 * n));
            s = s + ts;
            c = c - tc;
        }
        // remaining terms are below 1e-19
        let tail = |from: usize| (0..4).rev().fold(0.0, |acc, j| {
            let n = (from + 2 * j) as f64;
            -x2 / (n * (n + 1.0)) * (1.0 + acc)
        });
        let s_tail = ts.hi * tail(10);
        let c_tail = -tc.hi * tail(11);
        s = s + Dd::new(s_tail);
        c = c + Dd::new(c_tail);
        for _ in 0..3 {
            let s2 = (s * c).scale(1);
            c = Dd::ONE - s.sqr().scale(1);
            s = s2;
        }
        match (q as i64).rem_euclid(4) {
            0 => (s, c),
            1 => (c, -s),
            2 => (-s, -c),
            _ => (-c, s),
        }
    }

    /// `atan2(y, x)` of exact f64 inputs, corrected from the f64 angle.
    pub fn atan2(y: f64, x: f64) -> Self {
        let t0 = y.atan2(x);
        let (s, c) = Dd::new(t0).sin_cos();
        // rotate (x, y) by −t0; the residual angle is tiny
        let w_re = c.mul_f64(x) + s.mul_f64(y);
        let w_im = c.mul_f64(y) - s.mul_f64(x);
        Dd::new(t0) + w_im / w_re
    }

    /// `x² + y²` of exact f64 inputs.
    pub fn norm_sqr(x: f64, y: f64) -> Self {
        two_prod(x, x) + two_prod(y, y)
    }

    /// Remainder in `[−π, π]` modulo `2π`.
    pub fn rem_tau(self) -> Self {
        let k = (self.hi / TAU.hi).round();
        let r = self - TAU.mul_f64(k);
        if r.hi > PI.hi {
            r - TAU
        } else if r.hi < -PI.hi {
            r + TAU
        } else {
            r
        }
    }

    pub fn tau() -> Self {
        TAU
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let s = two_sum(self.hi, b.hi);
        let t = two_sum(self.lo, b.lo);
        let s = quick_two_sum(s.hi, s.lo + t.hi);
        quick_two_sum(s.hi, s.lo + t.lo)
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let p = two_prod(self.hi, b.hi);
        quick_two_sum(p.hi, p.lo + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        quick_two_sum(q1, q2) + Dd::new(q3)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::Float;

    const P: u32 = 250;

    fn mp(x: Dd) -> Float {
        Float::with_val(P, x.hi) + x.lo
    }

    fn rel(x: Dd, r: Float) -> f64 {
        let d = mp(x) - &r;
        if r.is_zero() {
            d.to_f64().abs()
        } else {
            (d / r).to_f64().abs()
        }
    }

    fn sample(i: usize) -> Dd {
        Dd::new(-30.0 + 0.0371 * i as f64) + Dd::new(1e-17 * (i % 7) as f64)
    }

    #[test]
    fn transcendental_accuracy() {
        let mut worst = [0.0f64; 4];
        for i in 0..1600 {
            let a = sample(i);
            worst[0] = worst[0].max(rel(a.exp(), mp(a).exp()));
            let pos = Dd::new(1e-3 + 0.73 * i as f64) + Dd::new(3e-20);
            worst[1] = worst[1].max(rel(pos.ln(), mp(pos).ln()));
            let (s, c) = a.sin_cos();
            let (ms, mc) = mp(a).sin_cos(Float::new(P));
            // absolute accuracy matters for the phase
            worst[2] = worst[2].max((mp(s) - ms).to_f64().abs());
            worst[3] = worst[3].max((mp(c) - mc).to_f64().abs());
        }
        assert!(worst.iter().all(|&w| w < 1e-30), "{worst:?}");
    }

    #[test]
    fn angle_and_modulus() {
        for (y, x) in [(1.0, 1.0), (3.7e3, -2.2e3), (-1e-3, -5.0), (2.5, 1e-9)] {
            let t = Dd::atan2(y, x);
            let r = Float::with_val(P, y).atan2(&Float::with_val(P, x));
            assert!(rel(t, r) < 1e-30);
            let n = Dd::norm_sqr(x, y);
            let r = Float::with_val(P, x).square() + Float::with_val(P, y).square();
            assert!(rel(n, r) < 1e-31);
        }
    }

    #[test]
    fn tau_reduction() {
        let a = Dd::new(12345.678) + Dd::new(1e-13);
        let r = a.rem_tau();
        let tau = Float::with_val(P, rug::float::Constant::Pi) * 2u32;
        let exact = mp(a).remainder(&tau);
        assert!((mp(r) - exact).to_f64().abs() < 1e-27);
    }
}
