//! Sector envelope `C₁(1+|z|)^{(1−β)/α} e^{Re z^{1/α}} + C₂/(1+|z|)` and an
//! empirical fit of the constants.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::eval::MlEvaluator;
use super::params::MlParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorBoundParams {
    c1: f64,
    c2: f64,
    theta_sector: f64,
}

impl SectorBoundParams {
    /// Requires `πα/2 < θ ≤ min(π, πα)` and `α < 2`.
    pub fn new(alpha: f64, c1: f64, c2: f64, theta_sector: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 2.0) {
            return Err(Error::InvalidParams(format!("sector bound needs 0 < alpha < 2, got {alpha}")));
        }
        if !(c1 > 0.0 && c2 > 0.0 && c1.is_finite() && c2.is_finite()) {
            return Err(Error::InvalidParams(format!("constants must be positive, got C1={c1}, C2={c2}")));
        }
        let lo = PI * alpha / 2.0;
        let hi = PI.min(PI * alpha);
        if !(theta_sector > lo && theta_sector <= hi) {
            return Err(Error::InvalidParams(format!(
                "sector half-angle {theta_sector} not in ({lo}, {hi}]"
            )));
        }
        Ok(Self { c1, c2, theta_sector })
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn c2(&self) -> f64 {
        self.c2
    }

    pub fn theta_sector(&self) -> f64 {
        self.theta_sector
    }
}

pub fn sector_envelope(params: MlParams, z: Complex64, sb: &SectorBoundParams) -> Result<f64> {
    let arg = z.arg();
    if arg.abs() > sb.theta_sector {
        return Err(Error::OutsideSector { arg, theta: sb.theta_sector });
    }
    Ok(envelope_shape(params, z, sb.c1, sb.c2))
}

fn envelope_shape(params: MlParams, z: Complex64, c1: f64, c2: f64) -> f64 {
    let (alpha, beta) = (params.alpha(), params.beta());
    let r = z.norm();
    let re_root = r.powf(1.0 / alpha) * (z.arg() / alpha).cos();
    c1 * (1.0 + r).powf((1.0 - beta) / alpha) * re_root.exp() + c2 / (1.0 + r)
}

/// Smallest `C = C₁ = C₂` for which the envelope dominates `|E_{α,β}|` at
/// every grid point. Points where the function is not representable are
/// skipped; the second value counts them.
pub fn fit_envelope_constant(
    evaluator: &MlEvaluator,
    points: &[Complex64],
    rel_tol: f64,
) -> Result<(f64, usize)> {
    let params = evaluator.params();
    let mut c = 0.0f64;
    let mut skipped = 0;
    for &z in points {
        let v = match evaluator.eval(z, rel_tol) {
            Ok(v) => v.norm(),
            Err(Error::NonFinite { .. }) | Err(Error::ToleranceUnreachable { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let shape = envelope_shape(params, z, 1.0, 1.0);
        c = c.max(v / shape);
    }
    Ok((c, skipped))
}

/// Points on the ray `arg z = πα/2` with `|z|` geometric in `[lo, hi]`, plus 0.
pub fn ray_grid(alpha: f64, lo: f64, hi: f64, n: usize) -> Vec<Complex64> {
    let dir = Complex64::from_polar(1.0, PI * alpha / 2.0);
    let mut pts = vec![Complex64::new(0.0, 0.0)];
    let (a, b) = (lo.ln(), hi.ln());
    for i in 0..n {
        let t = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
        pts.push(dir * (a + t * (b - a)).exp());
    }
    pts
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_on_imaginary_axis() {
        let p = MlParams::new(1.0, 2.0).unwrap();
        let sb = SectorBoundParams::new(1.0, 1.0, 1.0, 0.6 * PI).unwrap();
        let v = sector_envelope(p, Complex64::new(0.0, 10.0), &sb).unwrap();
        assert!((v - 2.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn envelope_half_alpha() {
        let p = MlParams::new(0.5, 1.5).unwrap();
        let sb = SectorBoundParams::new(0.5, 2.0, 3.0, PI / 2.0).unwrap();
        let v = sector_envelope(p, Complex64::new(0.0, 4.0), &sb).unwrap();
        let expect = 0.4 * (-16.0f64).exp() + 0.6;
        assert!((v - expect).abs() < 1e-15);
    }

    #[test]
    fn outside_sector_rejected() {
        let p = MlParams::new(1.0, 1.0).unwrap();
        let sb = SectorBoundParams::new(1.0, 1.0, 1.0, 0.6 * PI).unwrap();
        let err = sector_envelope(p, Complex64::new(-1.0, 0.1), &sb).unwrap_err();
        assert!(matches!(err, Error::OutsideSector { .. }));
    }

    #[test]
    fn sector_angle_validated() {
        assert!(SectorBoundParams::new(1.0, 1.0, 1.0, 0.4 * PI).is_err());
        assert!(SectorBoundParams::new(2.0, 1.0, 1.0, PI).is_err());
        assert!(SectorBoundParams::new(1.0, 0.0, 1.0, 0.6 * PI).is_err());
    }

    #[test]
    fn fitted_constant_is_finite_and_dominates() {
        let p = MlParams::new(0.6, 1.4).unwrap();
        let ev = MlEvaluator::new(p);
        let pts = ray_grid(0.6, 0.1, 1e3, 40);
        let (c, skipped) = fit_envelope_constant(&ev, &pts, 1e-10).unwrap();
        assert_eq!(skipped, 0);
        assert!(c.is_finite() && c > 0.0);
        let sb = SectorBoundParams::new(0.6, c, c, 0.6 * PI).unwrap();
        for z in pts {
            let e = ev.eval(z, 1e-10).unwrap().norm();
            assert!(sector_envelope(p, z, &sb).unwrap() >= e * (1.0 - 1e-12));
        }
    }
}
