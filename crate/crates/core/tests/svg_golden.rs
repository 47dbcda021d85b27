//! Byte-for-byte SVG goldens. Regenerate with `MLFC_BLESS=1`.

use std::path::PathBuf;

use mlfc_core::bounds::{theoretical_rate, verify_samples, TheoremId, TheoremSetting, VerifyOptions};
use mlfc_core::cli::{render_svg, Plot};
use mlfc_core::fpde::{PdeProblem, PdeSolver, UniformGrid};
use mlfc_core::mlf::{MlConfig, MlParams};
use mlfc_core::phases::Amplitude;

fn check(name: &str, svg: &str) {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    if std::env::var_os("MLFC_BLESS").is_some() {
        std::fs::write(&path, svg).unwrap();
        return;
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e} (run with MLFC_BLESS=1)", path.display()));
    assert!(want == svg, "{name} differs from the golden file");
}

#[test]
fn synthetic_decay_plot() {
    let setting = TheoremSetting::new(TheoremId::T33);
    let params = MlParams::new(1.0, 1.0).unwrap();
    let rate = theoretical_rate(params, 2, &setting).unwrap();
    let samples: Vec<(f64, f64, f64)> = (0..16)
        .map(|i| {
            let l = 10f64 * 1e3f64.powf(i as f64 / 15.0);
            (l, 0.7 / l.sqrt(), 1e-12)
        })
        .collect();
    let report = verify_samples(&setting, params, 2, rate, None, 1.0, &samples, &VerifyOptions::default()).unwrap();
    assert!(report.pass);
    let svg = render_svg(&Plot::decay(&report)).unwrap();
    assert_eq!(svg.matches(r#"class="data""#).count(), 1);
    assert_eq!(svg.matches(r#"class="reference""#).count(), 1);
    assert!(!svg.contains("NaN") && !svg.contains("inf"));
    check("decay_t33.svg", &svg);
}

#[test]
fn klein_gordon_field_plot() {
    let grid = UniformGrid::new(-5.0, 5.0, 41).unwrap();
    let p = PdeProblem::klein_gordon(2.0, 1.0, Amplitude::Gaussian { sigma: 1.0 }, grid, 1e-9).unwrap();
    let snap = PdeSolver::new(p, MlConfig::default()).unwrap().solve(1.0).unwrap();
    let svg = render_svg(&Plot::field(&snap)).unwrap();
    assert_eq!(svg.matches("<polyline").count(), 1);
    check("kg_field.svg", &svg);
}
