//! Oscillation-aware panelling and adaptive Gauss–Kronrod refinement for
//! complex integrands.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quad::{gk21_combine, gk21_nodes};

/// Largest phase advance allowed across one initial panel.
pub const PHASE_PER_PANEL: f64 = std::f64::consts::PI;

/// Splits `[lo, hi]` (already cut at the given breakpoints) into panels on
/// which `freq · h ≤ PHASE_PER_PANEL`, with `freq` sampled at five points per
/// panel. At most `max_panels` panels are produced.
pub fn oscillation_panels<F: Fn(f64) -> f64>(
    breakpoints: &[f64],
    freq: F,
    max_panels: usize,
) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for w in breakpoints.windows(2) {
        let mut stack = vec![(w[0], w[1])];
        while let Some((a, b)) = stack.pop() {
            if b <= a {
                continue;
            }
            let h = b - a;
            let peak = (0..5).map(|i| freq(a + h * i as f64 / 4.0)).fold(0.0f64, f64::max);
            let n = (1.1 * peak * h / PHASE_PER_PANEL).ceil().max(1.0);
            if n <= 1.0 {
                out.push((a, b));
            } else {
                let n = n.min(64.0) as usize;
                // reverse so that panels come out left to right
                for i in (0..n).rev() {
                    stack.push((a + h * i as f64 / n as f64, a + h * (i + 1) as f64 / n as f64));
                }
            }
            if out.len() + stack.len() > max_panels {
                return Err(Error::BudgetExceeded { needed: out.len() + stack.len(), budget: max_panels });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    err: f64,
    abs: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveResult {
    pub value: Complex64,
    pub error: f64,
    /// `∫ |f|` by the same rule.
    pub abs_integral: f64,
    /// `max |f|` over the nodes.
    pub sup: f64,
    pub n_evals: usize,
    pub panels: usize,
}

fn panel<F>(f: &F, a: f64, b: f64) -> Result<(Panel, f64)>
where
    F: Fn(f64) -> Result<Complex64>,
{
    let x = gk21_nodes(a, b);
    let mut v = [Complex64::new(0.0, 0.0); 21];
    for (vi, &xi) in v.iter_mut().zip(x.iter()) {
        *vi = f(xi)?;
    }
    let (k, g) = gk21_combine(a, b, &v);
    let absv = v.map(|c| c.norm());
    let (ka, _) = gk21_combine(a, b, &absv);
    let sup = absv.iter().copied().fold(0.0, f64::max);
    Ok((Panel { a, b, value: k, err: (k - g).norm(), abs: ka }, sup))
}

/// Adaptive GK21 starting from `initial` panels.
///
/// Each round bisects every panel whose error is at least a quarter of the
/// largest one. The round schedule does not depend on `tol`, so a smaller
/// tolerance only continues the same sequence; the state with the smallest
/// total error seen is returned. Panels are evaluated in parallel and reduced
/// in panel order.
pub fn integrate_adaptive<F>(f: &F, initial: &[(f64, f64)], tol: f64, max_evals: usize) -> Result<AdaptiveResult>
where
    F: Fn(f64) -> Result<Complex64> + Sync,
{
    let eval_all = |ps: &[(f64, f64)]| -> Result<Vec<(Panel, f64)>> {
        ps.par_iter().map(|&(a, b)| panel(f, a, b)).collect()
    };
    if initial.len() * 21 > max_evals {
        return Err(Error::BudgetExceeded { needed: initial.len() * 21, budget: max_evals });
    }
    let first = eval_all(initial)?;
    let mut sup = first.iter().map(|p| p.1).fold(0.0, f64::max);
    let mut panels: Vec<Panel> = first.into_iter().map(|p| p.0).collect();
    let mut n_evals = 21 * panels.len();
    let summarize = |ps: &[Panel]| {
        let mut v = Complex64::new(0.0, 0.0);
        let (mut e, mut ab) = (0.0, 0.0);
        for p in ps {
            v += p.value;
            e += p.err;
            ab += p.abs;
        }
        (v, e, ab)
    };
    let (v, e, ab) = summarize(&panels);
    let mut best = AdaptiveResult { value: v, error: e, abs_integral: ab, sup, n_evals, panels: panels.len() };
    loop {
        if best.error <= tol {
            best.n_evals = n_evals;
            best.sup = sup;
            return Ok(best);
        }
        let max_err = panels.iter().map(|p| p.err).fold(0.0, f64::max);
        let split: Vec<usize> = (0..panels.len()).filter(|&i| panels[i].err >= 0.25 * max_err).collect();
        let needed = n_evals + split.len() * 42;
        if needed > max_evals {
            return Err(Error::QuadratureFailure { tol, est: best.error, evals: n_evals });
        }
        let mut halves = Vec::with_capacity(2 * split.len());
        for &i in &split {
            let m = 0.5 * (panels[i].a + panels[i].b);
            if m <= panels[i].a || m >= panels[i].b {
                return Err(Error::QuadratureFailure { tol, est: best.error, evals: n_evals });
            }
            halves.push((panels[i].a, m));
            halves.push((m, panels[i].b));
        }
        let fresh = eval_all(&halves)?;
        n_evals = needed;
        let mut next = Vec::with_capacity(panels.len() + split.len());
        let mut fresh_iter = fresh.into_iter();
        let mut split_iter = split.iter().peekable();
        for (i, p) in panels.iter().enumerate() {
            if split_iter.peek() == Some(&&i) {
                split_iter.next();
                for _ in 0..2 {
                    let (q, s) = fresh_iter.next().unwrap();
                    sup = sup.max(s);
                    next.push(q);
                }
            } else {
                next.push(*p);
            }
        }
        panels = next;
        let (v, e, ab) = summarize(&panels);
        if e < best.error {
            best = AdaptiveResult { value: v, error: e, abs_integral: ab, sup, n_evals, panels: panels.len() };
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panels_respect_frequency() {
        let ps = oscillation_panels(&[0.0, 1.0], |x| 100.0 * x, 10_000).unwrap();
        for &(a, b) in &ps {
            assert!(100.0 * b * (b - a) <= PHASE_PER_PANEL * 1.1);
        }
        assert_eq!(ps.first().unwrap().0, 0.0);
        assert_eq!(ps.last().unwrap().1, 1.0);
        for w in ps.windows(2) {
            assert_eq!(w[0].1, w[1].0);
        }
    }

    #[test]
    fn oscillatory_exponential() {
        let lam = 300.0;
        let f = |x: f64| Ok(Complex64::new(0.0, lam * x).exp());
        let ps = oscillation_panels(&[0.0, 1.0], |_| lam, 10_000).unwrap();
        let r = integrate_adaptive(&f, &ps, 1e-12, 1_000_000).unwrap();
        let exact = (Complex64::new(0.0, lam).exp() - 1.0) / Complex64::new(0.0, lam);
        assert!((r.value - exact).norm() < 1e-13);
        assert!(r.error <= 1e-12);
    }

    #[test]
    fn budget_enforced() {
        let f = |x: f64| Ok(Complex64::new(x.abs().sqrt(), 0.0));
        let err = integrate_adaptive(&f, &[(-1.0, 1.0)], 1e-300, 2000).unwrap_err();
        assert!(matches!(err, Error::QuadratureFailure { .. }));
    }
}
