//! Fixed quadrature rules: the 21-point Gauss–Kronrod pair and Gauss–Legendre
//! rules of arbitrary order.

use std::sync::OnceLock;

/// Kronrod abscissae on [0, 1) in decreasing order; odd indices are the
/// 10-point Gauss nodes.
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_977_057_324,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// The 21 Kronrod nodes on `[a, b]`.
pub fn gk21_nodes(a: f64, b: f64) -> [f64; 21] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut x = [0.0; 21];
    for i in 0..10 {
        x[2 * i] = c - h * XGK[i];
        x[2 * i + 1] = c + h * XGK[i];
    }
    x[20] = c;
    x
}

/// Kronrod and Gauss estimates from values at [`gk21_nodes`].
pub fn gk21_combine<T>(a: f64, b: f64, f: &[T; 21]) -> (T, T)
where
    T: Copy + std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T>,
{
    let h = 0.5 * (b - a);
    let mut k = f[20] * WGK[10];
    let mut g = f[20] * 0.0;
    for i in 0..10 {
        let pair = f[2 * i] + f[2 * i + 1];
        k = k + pair * WGK[i];
        if i % 2 == 1 {
            g = g + pair * WG[i / 2];
        }
    }
    (k * h, g * h)
}

/// Adaptive GK21 for real integrands: returns (value, error estimate).
pub fn integrate_real<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64, max_panels: usize) -> (f64, f64) {
    let eval = |a: f64, b: f64| {
        let x = gk21_nodes(a, b);
        let v = x.map(&f);
        let (k, g) = gk21_combine(a, b, &v);
        (k, (k - g).abs())
    };
    let mut panels = vec![(a, b, eval(a, b))];
    loop {
        let total: f64 = panels.iter().map(|p| p.2 .1).sum();
        if total <= tol || panels.len() >= max_panels {
            let value = panels.iter().map(|p| p.2 .0).sum();
            return (value, total);
        }
        let (i, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.total_cmp(&y.1 .2 .1))
            .unwrap();
        let (pa, pb, _) = panels.swap_remove(i);
        let m = 0.5 * (pa + pb);
        panels.push((pa, m, eval(pa, m)));
        panels.push((m, pb, eval(m, pb)));
    }
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut r = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, r);
            dp = d;
            let dx = p / d;
            r -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, r);
        dp = if d != 0.0 { d } else { dp };
        x[i] = -r;
        x[n - 1 - i] = r;
        let wi = 2.0 / ((1.0 - r * r) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// 16-point Gauss–Legendre rule, computed once.
pub fn gl16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(16))
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn moment(deg: u32) -> f64 {
        // ∫_{-1}^{1} x^deg dx
        if deg % 2 == 1 {
            0.0
        } else {
            2.0 / (deg as f64 + 1.0)
        }
    }

    #[test]
    fn kronrod_and_gauss_degrees() {
        for deg in 0..=31u32 {
            let x = gk21_nodes(-1.0, 1.0);
            let v = x.map(|t| t.powi(deg as i32));
            let (k, g) = gk21_combine(-1.0, 1.0, &v);
            assert!((k - moment(deg)).abs() < 1e-14, "kronrod deg {deg}");
            if deg <= 19 {
                assert!((g - moment(deg)).abs() < 1e-14, "gauss deg {deg}");
            }
        }
    }

    #[test]
    fn gauss_legendre_exact_to_degree_31() {
        let (x, w) = gauss_legendre(16);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        for deg in 0..=31u32 {
            let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert!((s - moment(deg)).abs() < 1e-14, "deg {deg}");
        }
    }

    #[test]
    fn adaptive_real() {
        let (v, e) = integrate_real(|x| (10.0 * x).sin().powi(2), 0.0, 3.0, 1e-13, 1000);
        let exact = 1.5 - (60.0f64).sin() / 40.0;
        assert!((v - exact).abs() < 1e-12 && e < 1e-13);
    }
}
