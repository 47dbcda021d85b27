use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values at or below this are treated as zero and left out of a fit.
pub const VALUE_FLOOR: f64 = 1e-15;
pub const MIN_FIT_POINTS: usize = 8;
/// Decades of `λ` a fit must span.
pub const MIN_DECADES: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum FitModel {
    /// `log|I|` against `log λ`.
    PurePower,
    /// `log(|I| / log^p(1+λ))` against `log λ`.
    PowerWithLog { p: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Abscissae of the usable samples (`λ` or the rate base).
    pub lambda_grid: Vec<f64>,
    /// Ordinates of the usable samples after any correction.
    pub abs_values: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub with_log_correction: bool,
    /// Samples dropped for being at or below the floor.
    pub excluded: usize,
}

/// Least-squares line through `(ln x, ln y)`. Both slices have the same
/// length and the `x` are positive and strictly increasing.
pub(crate) fn fit_log_log(xs: &[f64], ys: &[f64], floor: f64, with_log: bool) -> Result<DecayFit> {
    if xs.windows(2).any(|w| !(w[1] > w[0])) || xs.first().is_some_and(|&x| !(x > 0.0)) {
        return Err(Error::InvalidParams("fit abscissae must be positive and strictly increasing".into()));
    }
    let mut lx = Vec::new();
    let mut ly = Vec::new();
    let mut kept_x = Vec::new();
    let mut kept_y = Vec::new();
    for (&x, &y) in xs.iter().zip(ys) {
        if y.is_finite() && y > floor {
            lx.push(x.ln());
            ly.push(y.ln());
            kept_x.push(x);
            kept_y.push(y);
        }
    }
    let excluded = xs.len() - lx.len();
    let n = lx.len();
    if n < MIN_FIT_POINTS {
        return Err(Error::DegenerateFit {
            usable: n,
            excluded,
            reason: format!("at least {MIN_FIT_POINTS} samples above {floor:e} are required"),
        });
    }
    let span = (kept_x[n - 1] / kept_x[0]).log10();
    if span < MIN_DECADES - 1e-9 {
        return Err(Error::DegenerateFit {
            usable: n,
            excluded,
            reason: format!("samples span {span:.3} decades, need {MIN_DECADES}"),
        });
    }
    let nf = n as f64;
    let mx = lx.iter().sum::<f64>() / nf;
    let my = ly.iter().sum::<f64>() / nf;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ly.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    // relative to the data scale, a residual this small is rounding
    let r_squared = if ss_tot <= 1e-24 * nf * (1.0 + my * my) { 1.0 } else { (1.0 - ss_res / ss_tot).clamp(0.0, 1.0) };
    Ok(DecayFit {
        lambda_grid: kept_x,
        abs_values: kept_y,
        slope,
        intercept,
        r_squared,
        with_log_correction: with_log,
        excluded,
    })
}

/// Fits `|I(λ)| ≈ e^{intercept} λ^{slope}` (times `log^p(1+λ)` for
/// [`FitModel::PowerWithLog`]). Samples need not be sorted.
pub fn fit_decay(samples: &[(f64, f64)], model: FitModel) -> Result<DecayFit> {
    let mut s = samples.to_vec();
    s.sort_by(|a, b| a.0.total_cmp(&b.0));
    let xs: Vec<f64> = s.iter().map(|p| p.0).collect();
    let (ys, with_log): (Vec<f64>, bool) = match model {
        FitModel::PurePower => (s.iter().map(|p| p.1).collect(), false),
        FitModel::PowerWithLog { p } => {
            // drop sub-floor values before the correction can lift them
            (s.iter().map(|&(l, v)| if v > VALUE_FLOOR { v / l.ln_1p().powf(p) } else { 0.0 }).collect(), true)
        }
    };
    fit_log_log(&xs, &ys, if with_log { 0.0 } else { VALUE_FLOOR }, with_log)
}

/// `n` points geometric on `[lo, hi]`, endpoints exact.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || n < 2 {
        return Err(Error::InvalidParams(format!("grid {lo}:{hi}:{n} needs 0 < lo < hi and n >= 2")));
    }
    let r = (hi / lo).ln() / (n - 1) as f64;
    Ok((0..n)
        .map(|i| if i == n - 1 { hi } else { lo * (r * i as f64).exp() })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_power_law() {
        let grid = geometric_grid(10.0, 1e4, 16).unwrap();
        let s: Vec<_> = grid.iter().map(|&l| (l, l.powf(-0.5))).collect();
        let f = fit_decay(&s, FitModel::PurePower).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-12);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_samples() {
        let grid = geometric_grid(10.0, 1e4, 16).unwrap();
        let s: Vec<_> = grid.iter().map(|&l| (l, 0.3)).collect();
        let f = fit_decay(&s, FitModel::PurePower).unwrap();
        assert!(f.slope.abs() < 1e-12);
        assert_eq!(f.r_squared, 1.0);
    }

    #[test]
    fn log_corrected_power() {
        let grid = geometric_grid(10.0, 1e4, 16).unwrap();
        let s: Vec<_> = grid.iter().map(|&l| (l, l.ln_1p() / l)).collect();
        let f = fit_decay(&s, FitModel::PowerWithLog { p: 1.0 }).unwrap();
        assert!((f.slope + 1.0).abs() < 1e-6);
        assert!(f.with_log_correction);
        // without the correction the slope is visibly shallower
        let g = fit_decay(&s, FitModel::PurePower).unwrap();
        assert!(g.slope > -0.9);
    }

    #[test]
    fn sub_floor_values_are_counted() {
        let grid = geometric_grid(10.0, 1e4, 12).unwrap();
        let mut s: Vec<_> = grid.iter().map(|&l| (l, 1.0 / l)).collect();
        s[11].1 = 0.0;
        s[10].1 = 1e-16;
        let f = fit_decay(&s, FitModel::PurePower).unwrap();
        assert_eq!(f.excluded, 2);
        assert_eq!(f.lambda_grid.len(), 10);
        s[9].1 = 0.0;
        s[8].1 = 0.0;
        s[7].1 = 0.0;
        match fit_decay(&s, FitModel::PurePower) {
            Err(Error::DegenerateFit { usable: 7, excluded: 5, .. }) => {}
            other => panic!("expected a degenerate fit, got {other:?}"),
        }
    }

    #[test]
    fn short_span_is_degenerate() {
        let grid = geometric_grid(10.0, 500.0, 16).unwrap();
        let s: Vec<_> = grid.iter().map(|&l| (l, 1.0 / l)).collect();
        assert!(matches!(fit_decay(&s, FitModel::PurePower), Err(Error::DegenerateFit { .. })));
    }

    #[test]
    fn grid_endpoints() {
        let g = geometric_grid(10.0, 1e4, 16).unwrap();
        assert_eq!(g[0], 10.0);
        assert_eq!(g[15], 1e4);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
        assert!(geometric_grid(1.0, 1.0, 4).is_err());
    }

    proptest! {
        #[test]
        fn recovers_slope_and_bounded_r2(slope in -3.0f64..1.0, c in 0.01f64..100.0, noise in 0.0f64..0.3) {
            let grid = geometric_grid(10.0, 1e4, 16).unwrap();
            let s: Vec<_> = grid.iter().enumerate()
                .map(|(i, &l)| (l, c * l.powf(slope) * (1.0 + noise * if i % 2 == 0 { 1.0 } else { -0.5 })))
                .collect();
            let f = fit_decay(&s, FitModel::PurePower).unwrap();
            prop_assert!((0.0..=1.0).contains(&f.r_squared));
            if noise == 0.0 {
                prop_assert!((f.slope - slope).abs() < 1e-9);
            }
        }
    }
}
