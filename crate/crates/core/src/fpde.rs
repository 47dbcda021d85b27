//! Fourier-synthesis solutions of the time-fractional Klein-Gordon and
//! Schrödinger model problems and their sup-norm decay.
//!
//! Both solutions have the form `u(t,x) = ∫ e^{ixξ} K(t, ξ²+μ) ψ̂(ξ) dξ` with
//!
//! * Klein-Gordon (`1 < α ≤ 2`): `K = t^{α−1} E_{α,α}(i^α w t^α)`,
//! * Schrödinger (`0 < α ≤ 1`, `0 ≤ γ < α`):
//!   `K = Γ(1−γ) t^{α−γ} E_{α,α−γ+1}(i^α w t^α)`,
//!
//! where `w = ξ²+μ`. The `ξ`-integral is truncated to `[−Ξ, Ξ]` and computed
//! with composite 16-point Gauss-Legendre panels sized to the oscillation of
//! `e^{ixξ}` and of the kernel; the panel count is doubled until two
//! successive resolutions agree.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mlf::{i_pow, MlConfig, MlEvaluator, MlParams};
use crate::phases::Amplitude;
use crate::quad::gl16;
use crate::special::gamma_fn;

/// Uniform grid `lo:hi:n` (both ends included).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformGrid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl UniformGrid {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) || n == 0 || (n == 1 && lo != hi) {
            return Err(Error::InvalidParams(format!("grid {lo}:{hi}:{n} is not a valid uniform grid")));
        }
        Ok(Self { lo, hi, n })
    }

    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.lo];
        }
        let h = (self.hi - self.lo) / (self.n - 1) as f64;
        (0..self.n).map(|i| if i == self.n - 1 { self.hi } else { self.lo + h * i as f64 }).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    KleinGordon,
    Schrodinger { gamma: f64 },
}

/// A model problem with initial data given in frequency space as
/// `psi_hat_scale · ψ̂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeProblem {
    pub model: Model,
    pub alpha: f64,
    pub mu: f64,
    pub psi_hat: Amplitude,
    pub psi_hat_scale: f64,
    /// `Ξ`; `None` picks the smallest radius whose tail is within `tol/2`.
    pub xi_truncation: Option<f64>,
    pub x_grid: UniformGrid,
    pub tol: f64,
}

/// `ψ(y) = exp(−y²/(2s²))` has transform `(1/π)∫e^{−iyξ}ψ(y)dy =
/// (s√(2π)/π)·exp(−s²ξ²/2)`: a Gaussian of width `1/s` and the returned scale.
pub fn spatial_gaussian_transform(s: f64) -> Result<(Amplitude, f64)> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParams(format!("spatial width {s} must be positive")));
    }
    Ok((Amplitude::Gaussian { sigma: 1.0 / s }, s * (2.0 * PI).sqrt() / PI))
}

impl PdeProblem {
    pub fn klein_gordon(alpha: f64, mu: f64, psi_hat: Amplitude, x_grid: UniformGrid, tol: f64) -> Result<Self> {
        let p = Self {
            model: Model::KleinGordon,
            alpha,
            mu,
            psi_hat,
            psi_hat_scale: 1.0,
            xi_truncation: None,
            x_grid,
            tol,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn schrodinger(
        alpha: f64,
        gamma: f64,
        mu: f64,
        psi_hat: Amplitude,
        x_grid: UniformGrid,
        tol: f64,
    ) -> Result<Self> {
        let p = Self {
            model: Model::Schrodinger { gamma },
            alpha,
            mu,
            psi_hat,
            psi_hat_scale: 1.0,
            xi_truncation: None,
            x_grid,
            tol,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match self.model {
            Model::KleinGordon => {
                if !(self.alpha > 1.0 && self.alpha <= 2.0) {
                    return Err(Error::InvalidParams(format!("Klein-Gordon needs 1 < alpha <= 2, got {}", self.alpha)));
                }
            }
            Model::Schrodinger { gamma } => {
                if !(self.alpha > 0.0 && self.alpha <= 1.0) {
                    return Err(Error::InvalidParams(format!("Schrodinger needs 0 < alpha <= 1, got {}", self.alpha)));
                }
                if !(gamma >= 0.0 && gamma < self.alpha) {
                    return Err(Error::InvalidParams(format!("Schrodinger needs 0 <= gamma < alpha, got {gamma}")));
                }
            }
        }
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return Err(Error::InvalidParams(format!("mass mu = {} must be positive", self.mu)));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParams(format!("tol = {} must be positive", self.tol)));
        }
        if !self.psi_hat_scale.is_finite() {
            return Err(Error::InvalidParams("psi_hat_scale must be finite".into()));
        }
        self.psi_hat.validate()?;
        if !self.psi_hat.l1_norm().is_finite() {
            return Err(Error::InvalidParams(format!("psi_hat = {} is not integrable", self.psi_hat)));
        }
        Ok(())
    }

    /// `β` of the kernel's Mittag-Leffler function.
    pub fn kernel_beta(&self) -> f64 {
        match self.model {
            Model::KleinGordon => self.alpha,
            Model::Schrodinger { gamma } => self.alpha - gamma + 1.0,
        }
    }

    /// `‖scale·ψ̂‖_{L¹}`.
    pub fn psi_hat_l1(&self) -> f64 {
        self.psi_hat_scale.abs() * self.psi_hat.l1_norm()
    }

    /// Time envelope of the dispersive estimate.
    pub fn envelope(&self, t: f64) -> f64 {
        let e = match self.model {
            Model::KleinGordon => self.alpha - 1.0,
            Model::Schrodinger { gamma } => self.alpha - gamma,
        };
        t.powf(e) * (1.0 + t).powf(-e)
    }

    fn prefactor(&self, t: f64) -> f64 {
        match self.model {
            Model::KleinGordon => t.powf(self.alpha - 1.0),
            Model::Schrodinger { gamma } => gamma_fn(1.0 - gamma) * t.powf(self.alpha - gamma),
        }
    }

    fn truncation(&self) -> Result<(f64, f64)> {
        let limit = 0.5 * self.tol / self.psi_hat_scale.abs().max(f64::MIN_POSITIVE);
        let r = match self.xi_truncation {
            Some(r) => r,
            None => self.psi_hat.truncation_radius(limit).unwrap_or(0.0),
        };
        let tail = self.psi_hat.tail_mass(r);
        if tail > limit {
            return Err(Error::TailBoundFailure { radius: r, tail, limit });
        }
        Ok((r, tail * self.psi_hat_scale.abs()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSnapshot {
    pub t: f64,
    pub x: Vec<f64>,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub sup_norm: f64,
    pub quad_error: f64,
    pub xi_truncation: f64,
    pub panels: usize,
}

impl FieldSnapshot {
    pub fn values(&self) -> Vec<Complex64> {
        self.re.iter().zip(&self.im).map(|(&r, &i)| Complex64::new(r, i)).collect()
    }

    /// `(x, |u(t,x)|)`, the plottable series.
    pub fn series(&self) -> Vec<(f64, f64)> {
        self.x.iter().zip(self.values()).map(|(&x, v)| (x, v.norm())).collect()
    }
}

/// Evaluator for one problem, reusable across `t`.
pub struct PdeSolver {
    problem: PdeProblem,
    evaluator: MlEvaluator,
    ml_rel_tol: f64,
    max_panels: usize,
}

/// Values of the `ξ`-integrand factor `K·ψ̂` at the nodes of `n` panels.
struct Sampled {
    xi: Vec<f64>,
    /// `weight · K · scale·ψ̂`
    wk: Vec<Complex64>,
    /// `Σ |weight · K · scale·ψ̂|`
    abs_sum: f64,
    sup_k: f64,
}

impl PdeSolver {
    pub fn new(problem: PdeProblem, ml: MlConfig) -> Result<Self> {
        problem.validate()?;
        let params = MlParams::new(problem.alpha, problem.kernel_beta())?;
        Ok(Self { problem, evaluator: MlEvaluator::with_config(params, ml), ml_rel_tol: 1e-12, max_panels: 1 << 16 })
    }

    pub fn problem(&self) -> &PdeProblem {
        &self.problem
    }

    /// `E(i^α w t^α)` without the time prefactor.
    fn kernel_ml(&self, t_alpha: f64, xi: f64) -> Result<Complex64> {
        let w = xi * xi + self.problem.mu;
        self.evaluator.eval(i_pow(self.problem.alpha) * (w * t_alpha), self.ml_rel_tol)
    }

    fn sample(&self, t: f64, r: f64, n: usize) -> Result<Sampled> {
        let (gx, gw) = gl16();
        let h = 2.0 * r / n as f64;
        let nodes: Vec<(f64, f64)> = (0..n)
            .flat_map(|i| {
                let c = -r + h * (i as f64 + 0.5);
                gx.iter().zip(gw.iter()).map(move |(&x, &w)| (c + 0.5 * h * x, 0.5 * h * w))
            })
            .collect();
        let scale = self.problem.psi_hat_scale;
        let pre = self.problem.prefactor(t);
        let t_alpha = t.powf(self.problem.alpha);
        let vals: Vec<(Complex64, f64)> = nodes
            .par_iter()
            .map(|&(xi, w)| {
                let psi = self.problem.psi_hat.value(xi) * scale;
                if psi == 0.0 {
                    return Ok((Complex64::new(0.0, 0.0), 0.0));
                }
                let k = self.kernel_ml(t_alpha, xi)? * pre;
                Ok((k * (psi * w), k.norm()))
            })
            .collect::<Result<_>>()?;
        Ok(Sampled {
            xi: nodes.iter().map(|p| p.0).collect(),
            abs_sum: vals.iter().map(|v| v.0.norm()).sum(),
            sup_k: vals.iter().map(|v| v.1).fold(0.0, f64::max),
            wk: vals.into_iter().map(|v| v.0).collect(),
        })
    }

    /// `Σ_j wk_j e^{i x ξ_j}` at every grid point. Along the uniform grid the
    /// exponential advances by a fixed rotation, re-seeded every
    /// `RESEED` points; node chunks of fixed size are summed in order so the
    /// result does not depend on the thread count.
    fn synthesize(s: &Sampled, xs: &[f64]) -> Vec<Complex64> {
        const CHUNK: usize = 256;
        const RESEED: usize = 32;
        let n = xs.len();
        let h = if n > 1 { xs[1] - xs[0] } else { 0.0 };
        let partials: Vec<Vec<Complex64>> = s
            .xi
            .par_chunks(CHUNK)
            .zip(s.wk.par_chunks(CHUNK))
            .map(|(xi, wk)| {
                let mut acc = vec![Complex64::new(0.0, 0.0); n];
                for (&xi, &wk) in xi.iter().zip(wk) {
                    if wk == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    let step = Complex64::from_polar(1.0, h * xi);
                    let mut e = Complex64::new(0.0, 0.0);
                    for (j, a) in acc.iter_mut().enumerate() {
                        e = if j % RESEED == 0 { Complex64::from_polar(1.0, xs[j] * xi) } else { e * step };
                        *a += wk * e;
                    }
                }
                acc
            })
            .collect();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for p in partials {
            for (o, v) in out.iter_mut().zip(p) {
                *o += v;
            }
        }
        out
    }

    /// Starting panel count: at most `π` of combined phase per panel.
    fn initial_panels(&self, t: f64, r: f64) -> usize {
        let p = &self.problem;
        let w_max = r * r + p.mu;
        // the kernel phase is about (w t^α)^{1/α} = w^{1/α} t, so its total
        // variation over [−Ξ, Ξ] is 2(w_max^{1/α} − μ^{1/α}) t
        let kernel_var = 2.0 * (w_max.powf(1.0 / p.alpha) - p.mu.powf(1.0 / p.alpha)) * t;
        let x_var = 2.0 * r * p.x_grid.max_abs();
        (((kernel_var + x_var) / PI).ceil() as usize).max(8)
    }

    /// `u(t, ·)` on the problem's x-grid.
    pub fn solve(&self, t: f64) -> Result<FieldSnapshot> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParams(format!("t = {t} must be positive")));
        }
        let p = &self.problem;
        let xs = p.x_grid.points();
        let (r, tail) = self.truncation()?;
        if p.psi_hat.is_zero() || p.psi_hat_scale == 0.0 || r == 0.0 {
            let n = xs.len();
            return Ok(FieldSnapshot {
                t,
                x: xs,
                re: vec![0.0; n],
                im: vec![0.0; n],
                sup_norm: 0.0,
                quad_error: 0.0,
                xi_truncation: r,
                panels: 0,
            });
        }
        let mut n = self.initial_panels(t, r);
        let mut coarse = Self::synthesize(&self.sample(t, r, n)?, &xs);
        loop {
            if 2 * n > self.max_panels {
                return Err(Error::BudgetExceeded { needed: 2 * n * 16, budget: self.max_panels * 16 });
            }
            let fine_s = self.sample(t, r, 2 * n)?;
            let fine = Self::synthesize(&fine_s, &xs);
            let diff = fine.iter().zip(&coarse).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            let err = diff + self.ml_rel_tol * fine_s.abs_sum + tail * fine_s.sup_k;
            if err <= p.tol {
                let sup_norm = fine.iter().map(|v| v.norm()).fold(0.0, f64::max);
                return Ok(FieldSnapshot {
                    t,
                    x: xs,
                    re: fine.iter().map(|v| v.re).collect(),
                    im: fine.iter().map(|v| v.im).collect(),
                    sup_norm,
                    quad_error: err,
                    xi_truncation: r,
                    panels: 2 * n,
                });
            }
            coarse = fine;
            n *= 2;
        }
    }

    fn truncation(&self) -> Result<(f64, f64)> {
        self.problem.truncation()
    }
}

pub fn kg_solve(problem: &PdeProblem, t: f64) -> Result<FieldSnapshot> {
    if problem.model != Model::KleinGordon {
        return Err(Error::InvalidParams("kg_solve needs a Klein-Gordon problem".into()));
    }
    PdeSolver::new(problem.clone(), MlConfig::default())?.solve(t)
}

pub fn schrodinger_solve(problem: &PdeProblem, t: f64) -> Result<FieldSnapshot> {
    if !matches!(problem.model, Model::Schrodinger { .. }) {
        return Err(Error::InvalidParams("schrodinger_solve needs a Schrodinger problem".into()));
    }
    PdeSolver::new(problem.clone(), MlConfig::default())?.solve(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DispersiveSample {
    pub t: f64,
    pub sup_norm: f64,
    pub quad_error: f64,
    pub envelope: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersiveReport {
    pub model: Model,
    pub alpha: f64,
    pub mu: f64,
    pub psi_hat_l1: f64,
    pub samples: Vec<DispersiveSample>,
    pub max_ratio: f64,
    pub ratio_cap: f64,
    pub pass: bool,
}

impl DispersiveReport {
    /// `(t, sup|u|)` and `(t, envelope·‖ψ̂‖₁)`.
    pub fn series(&self) -> (Vec<(f64, f64)>, Vec<(f64, f64)>) {
        (
            self.samples.iter().map(|s| (s.t, s.sup_norm)).collect(),
            self.samples.iter().map(|s| (s.t, s.envelope * self.psi_hat_l1)).collect(),
        )
    }
}

/// `ρ(t) = sup|u(t,·)| / (envelope(t)·‖ψ̂‖₁)` over the grid; passes when
/// every ratio is at most `ratio_cap`.
pub fn dispersive_check(problem: &PdeProblem, t_grid: &[f64], ratio_cap: f64) -> Result<DispersiveReport> {
    dispersive_check_with(problem, t_grid, ratio_cap, MlConfig::default())
}

/// [`dispersive_check`] with an explicit evaluator configuration.
pub fn dispersive_check_with(problem: &PdeProblem, t_grid: &[f64], ratio_cap: f64, ml: MlConfig) -> Result<DispersiveReport> {
    if t_grid.is_empty() || t_grid.iter().any(|&t| !(t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidParams("t grid must be non-empty with positive entries".into()));
    }
    let solver = PdeSolver::new(problem.clone(), ml)?;
    let l1 = problem.psi_hat_l1();
    let samples = t_grid
        .iter()
        .map(|&t| {
            let snap = solver.solve(t)?;
            let envelope = problem.envelope(t);
            let ratio = if snap.sup_norm == 0.0 { 0.0 } else { snap.sup_norm / (envelope * l1) };
            Ok(DispersiveSample { t, sup_norm: snap.sup_norm, quad_error: snap.quad_error, envelope, ratio })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_ratio = samples.iter().map(|s| s.ratio).fold(0.0, f64::max);
    Ok(DispersiveReport {
        model: problem.model,
        alpha: problem.alpha,
        mu: problem.mu,
        psi_hat_l1: l1,
        samples,
        max_ratio,
        ratio_cap,
        pass: max_ratio <= ratio_cap,
    })
}
