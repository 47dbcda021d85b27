use serde::{Deserialize, Serialize};

use super::Domain;
use crate::error::{Error, Result};

pub const MAX_ORDER: u32 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Phase {
    /// `a·x + b`
    Affine { a: f64, b: f64 },
    /// `x^k / k! + c`
    Monomial { k: u32, c: f64 },
    /// `x² + c`
    Quadratic { c: f64 },
    /// `(x − c)^k`
    ShiftedPower { k: u32, c: f64 },
    /// `x² + μ`
    MassShell { mu: f64 },
}

/// `coef·(x − shift)^power + constant`; every derivative of every family has
/// this shape.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerForm {
    pub coef: f64,
    pub shift: f64,
    pub power: u32,
    pub constant: f64,
}

impl PowerForm {
    fn constant(c: f64) -> Self {
        Self { coef: 0.0, shift: 0.0, power: 0, constant: c }
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.coef == 0.0 {
            return self.constant;
        }
        self.coef * (x - self.shift).powi(self.power as i32) + self.constant
    }

    fn is_constant(&self) -> bool {
        self.coef == 0.0 || self.power == 0
    }

    /// Real roots of `coef·u^p = −constant`, as points `x = shift + u`.
    fn roots(&self) -> Vec<f64> {
        if self.is_constant() {
            return vec![];
        }
        let q = -self.constant / self.coef;
        let p = self.power;
        if q == 0.0 {
            return vec![self.shift];
        }
        if p % 2 == 1 {
            vec![self.shift + q.signum() * q.abs().powf(1.0 / p as f64)]
        } else if q > 0.0 {
            let u = q.powf(1.0 / p as f64);
            vec![self.shift - u, self.shift + u]
        } else {
            vec![]
        }
    }

    /// Exact `inf |g|` over the domain and a point attaining it. `None` as the
    /// witness means the infimum is approached at infinity.
    pub fn inf_abs(&self, domain: &Domain) -> (f64, Option<f64>) {
        if self.is_constant() {
            let v = self.eval(0.0).abs();
            let w = match domain {
                Domain::Interval { a, .. } => *a,
                Domain::WholeLine { .. } => 0.0,
            };
            return (v, Some(w));
        }
        let inside = |x: f64| domain.contains(x);
        let mut cands: Vec<f64> = self.roots().into_iter().filter(|&x| inside(x)).collect();
        if inside(self.shift) {
            cands.push(self.shift);
        }
        if let Domain::Interval { a, b } = *domain {
            cands.push(a);
            cands.push(b);
        }
        let mut best = (f64::INFINITY, None);
        for x in cands {
            let v = self.eval(x).abs();
            if v < best.0 {
                best = (v, Some(x));
            }
        }
        best
    }

    /// True if the sign of `g` is constant (zeros allowed only at isolated
    /// points) on the domain interior.
    pub fn sign_constant(&self, domain: &Domain) -> bool {
        if self.is_constant() {
            return true;
        }
        // A sign change needs an odd-order root strictly inside.
        self.roots().into_iter().filter(|&x| domain.contains_interior(x)).all(|x| {
            let d = 1e-6 * (1.0 + x.abs());
            let (l, r) = (self.eval(x - d), self.eval(x + d));
            l * r >= 0.0
        })
    }
}

impl Phase {
    /// `φ^{(order)}(x)`, `order ≤ 8`.
    pub fn eval(&self, x: f64, order: u32) -> Result<f64> {
        Ok(self.derivative(order)?.eval(x))
    }

    /// Closed form of `φ^{(order)}`.
    pub fn derivative(&self, order: u32) -> Result<PowerForm> {
        if order > MAX_ORDER {
            return Err(Error::UnsupportedOrder(order));
        }
        let falling = |k: u32, n: u32| (k - n + 1..=k).map(|j| j as f64).product::<f64>();
        let form = match *self {
            Phase::Affine { a, b } => match order {
                0 => PowerForm { coef: a, shift: 0.0, power: 1, constant: b },
                1 => PowerForm::constant(a),
                _ => PowerForm::constant(0.0),
            },
            Phase::Quadratic { c } | Phase::MassShell { mu: c } => match order {
                0 => PowerForm { coef: 1.0, shift: 0.0, power: 2, constant: c },
                1 => PowerForm { coef: 2.0, shift: 0.0, power: 1, constant: 0.0 },
                2 => PowerForm::constant(2.0),
                _ => PowerForm::constant(0.0),
            },
            Phase::Monomial { k, c } => {
                if order > k {
                    PowerForm::constant(0.0)
                } else {
                    let fact = (1..=(k - order)).map(|j| j as f64).product::<f64>();
                    PowerForm {
                        coef: 1.0 / fact,
                        shift: 0.0,
                        power: k - order,
                        constant: if order == 0 { c } else { 0.0 },
                    }
                }
            }
            Phase::ShiftedPower { k, c } => {
                if order > k {
                    PowerForm::constant(0.0)
                } else {
                    PowerForm { coef: falling(k, order), shift: c, power: k - order, constant: 0.0 }
                }
            }
        };
        Ok(form)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = match *self {
            Phase::Affine { a, b } => a.is_finite() && b.is_finite(),
            Phase::Monomial { c, .. } | Phase::Quadratic { c } | Phase::ShiftedPower { c, .. } => c.is_finite(),
            Phase::MassShell { mu } => mu.is_finite(),
        };
        if !finite {
            return Err(Error::InvalidParams(format!("non-finite phase parameter in {self}")));
        }
        match *self {
            Phase::Monomial { k, .. } | Phase::ShiftedPower { k, .. } if k == 0 || k > MAX_ORDER => {
                Err(Error::InvalidParams(format!("power k = {k} must be in 1..={MAX_ORDER}")))
            }
            Phase::MassShell { mu } if mu <= 0.0 => {
                Err(Error::InvalidParams(format!("mass mu = {mu} must be positive")))
            }
            _ => Ok(()),
        }
    }

    /// Derivative bounds without failing; see [`Phase::certify`].
    pub fn inspect(&self, k: u32, domain: &Domain) -> Result<PhaseCert> {
        let dk = self.derivative(k)?;
        let (inf_abs, witness) = dk.inf_abs(domain);
        let d1 = self.derivative(1)?;
        let d2 = self.derivative(2)?;
        Ok(PhaseCert {
            k,
            domain: *domain,
            inf_abs,
            witness,
            monotone_deriv: d2.sign_constant(domain),
            inf_abs_phase: self.derivative(0)?.inf_abs(domain).0,
            inf_abs_deriv: d1.inf_abs(domain).0,
            invertible: d1.sign_constant(domain) && !(d1.coef == 0.0 && d1.constant == 0.0),
        })
    }

    /// Certificate that `|φ^{(k)}| ≥ 1` on the domain.
    pub fn certify(&self, k: u32, domain: &Domain) -> Result<PhaseCert> {
        if k == 0 {
            return Err(Error::InvalidParams("certificate order k must be >= 1".into()));
        }
        let cert = self.inspect(k, domain)?;
        if cert.inf_abs < 1.0 {
            return Err(Error::NotCertifiable {
                k,
                witness: cert.witness.unwrap_or(f64::INFINITY),
                value: cert.inf_abs,
            });
        }
        Ok(cert)
    }

    /// Sampled `sup |(1/φ′)′| = sup |φ″/φ′²|` on an interval (10⁴ + 1 points).
    pub fn inverse_derivative_sup(&self, a: f64, b: f64) -> Result<f64> {
        let d1 = self.derivative(1)?;
        let d2 = self.derivative(2)?;
        let n = 10_000;
        let mut m = 0.0f64;
        for i in 0..=n {
            let x = a + (b - a) * i as f64 / n as f64;
            let p = d1.eval(x);
            m = m.max((d2.eval(x) / (p * p)).abs());
        }
        Ok(m)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseCert {
    pub k: u32,
    pub domain: Domain,
    /// `inf |φ^{(k)}|` over the domain.
    pub inf_abs: f64,
    /// A point where the infimum is attained, if it is attained.
    pub witness: Option<f64>,
    /// `φ″` keeps one sign, so `φ′` is monotone.
    pub monotone_deriv: bool,
    /// `inf |φ|`.
    pub inf_abs_phase: f64,
    /// `inf |φ′|`.
    pub inf_abs_deriv: f64,
    /// `φ` strictly monotone on the domain.
    pub invertible: bool,
}
