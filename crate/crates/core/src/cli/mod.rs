//! The `mlfc` command line: argument and config handling, dispatch, and
//! JSON / CSV / SVG emission.
//!
//! Exit codes: 0 success or passing verdict, 1 usage or configuration error,
//! 2 hypothesis violation, 3 numerical failure, 4 verdict computed and failed.

pub mod config;
pub mod svg;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Arg, ArgAction, ArgMatches};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bounds::{geometric_grid, riemann_lebesgue_report, verify_bound, BoundReport, TheoremId, TheoremSetting, VerifyOptions};
use crate::error::{Error, Result};
use crate::fpde::{dispersive_check_with, DispersiveReport, FieldSnapshot, Model, PdeProblem, PdeSolver, UniformGrid};
use crate::mlf::{ml_eval_oracle, MlConfig, MlEvaluator, MlParams};
use crate::oscint::{OscConfig, OscIntegralSpec, OscIntegrator};
use crate::phases::{Amplitude, Domain, Phase};
use crate::suite::{run_acceptance, ALL_CRITERIA};

pub use config::{Command, RunConfig};
pub use svg::{emit_svg, render_svg, Axes, Plot, Series};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_HYPOTHESIS: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_VERDICT: i32 = 4;

pub fn exit_code(e: &Error) -> i32 {
    if e.is_hypothesis_violation() {
        return EXIT_HYPOTHESIS;
    }
    match e {
        Error::InvalidParams(_) | Error::Parse(_) | Error::Config(_) => EXIT_USAGE,
        _ => EXIT_NUMERICAL,
    }
}

fn flag(name: &str) -> String {
    name.replace('_', "-")
}

fn clap_command() -> clap::Command {
    let mut root = clap::Command::new("mlfc")
        .about("Mittag-Leffler functions, oscillatory integrals and their decay estimates")
        .subcommand_required(false)
        .arg(Arg::new("config").long("config").global(true).value_name("FILE").help("key = value configuration file"))
        .arg(Arg::new("threads").long("threads").global(true).value_name("N").help("worker threads, 0 = all cores"));
    let mut groups: BTreeMap<&str, clap::Command> = BTreeMap::new();
    for c in Command::ALL {
        let mut sub = clap::Command::new(c.path().1.unwrap_or(c.path().0)).about(c.about());
        for k in c.keys().into_iter().filter(|k| k.name != "threads") {
            let mut help = k.help.to_string();
            if let Some(d) = k.default {
                help += &format!(" [default: {d}]");
            }
            sub = sub.arg(
                Arg::new(k.name)
                    .long(flag(k.name))
                    .value_name(k.name.to_uppercase())
                    .allow_hyphen_values(true)
                    .action(ArgAction::Set)
                    .help(help),
            );
        }
        match c.path() {
            (g, Some(_)) => {
                let group = groups.remove(g).unwrap_or_else(|| clap::Command::new(g).about(group_about(g)).subcommand_required(true));
                groups.insert(g, group.subcommand(sub));
            }
            (_, None) => {
                root = root.subcommand(sub);
            }
        }
    }
    for (_, g) in groups {
        root = root.subcommand(g);
    }
    root
}

fn group_about(g: &str) -> &'static str {
    match g {
        "mlf" => "Mittag-Leffler function evaluation",
        "decay" => "decay estimates for oscillatory integrals",
        "pde" => "fractional Klein-Gordon and Schrodinger solutions",
        "suite" => "acceptance suite",
        _ => "",
    }
}

/// The selected command and its explicit flags.
fn selected(m: &ArgMatches) -> Option<(Command, &ArgMatches)> {
    let (g, gm) = m.subcommand()?;
    let (c, cm) = match gm.subcommand() {
        Some((s, sm)) => (format!("{g} {s}"), sm),
        None => (g.to_string(), gm),
    };
    Some((c.parse().ok()?, cm))
}

/// Runs the CLI on `args` (including the program name) and returns the
/// exit code. JSON goes to `out`, the human summary to `err`.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let matches = match clap_command().try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if e.use_stderr() { write!(err, "{e}") } else { write!(out, "{e}") };
            return code;
        }
    };
    let cfg = match build_config(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return exit_code(&e);
        }
    };
    let threads: usize = match cfg.parse("threads") {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(err, "error: thread pool: {e}");
            return EXIT_NUMERICAL;
        }
    };
    match pool.install(|| execute(&cfg, out, err)) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

fn build_config(m: &ArgMatches) -> Result<RunConfig> {
    let env_file = match std::env::var_os("MLFC_CONFIG") {
        Some(p) if !p.is_empty() => config::read_config_file(Path::new(&p))?,
        _ => BTreeMap::new(),
    };
    let file = match m.get_one::<String>("config") {
        Some(p) => config::read_config_file(Path::new(p))?,
        None => BTreeMap::new(),
    };
    let named = match file.get("command") {
        Some(c) => Some(c.parse::<Command>()?),
        None => None,
    };
    let (command, sub) = match (selected(m), named) {
        (Some((c, _)), Some(n)) if c != n => {
            return Err(Error::Config(format!("config file is for `{n}`, but `{c}` was requested")));
        }
        (Some((c, sm)), _) => (c, Some(sm)),
        (None, Some(n)) => (n, None),
        (None, None) => return Err(Error::Config("no command given (see --help)".into())),
    };
    let mut flags = BTreeMap::new();
    if let Some(sm) = sub {
        for k in command.keys() {
            if k.name == "threads" {
                continue;
            }
            if let Some(v) = sm.get_one::<String>(k.name) {
                flags.insert(k.name.to_string(), v.clone());
            }
        }
    }
    if let Some(t) = m.get_one::<String>("threads") {
        flags.insert("threads".into(), t.clone());
    }
    RunConfig::resolve(command, &[&env_file, &file, &flags])
}

fn ml_config(cfg: &RunConfig) -> Result<MlConfig> {
    let series_radius: f64 = cfg.parse("r0")?;
    let asymptotic_radius: f64 = cfg.parse("r1")?;
    if !(series_radius > 0.0 && asymptotic_radius >= series_radius && asymptotic_radius.is_finite()) {
        return Err(Error::Config(format!("need 0 < r0 <= r1, got r0 = {series_radius}, r1 = {asymptotic_radius}")));
    }
    Ok(MlConfig { series_radius, asymptotic_radius, ..MlConfig::default() })
}

fn osc_config(cfg: &RunConfig) -> Result<OscConfig> {
    let ml_rel_tol: f64 = cfg.parse("ml_tol")?;
    if !(1e-14..=1e-4).contains(&ml_rel_tol) {
        return Err(Error::Config(format!("ml_tol = {ml_rel_tol:e} not in [1e-14, 1e-4]")));
    }
    Ok(OscConfig { ml: ml_config(cfg)?, ml_rel_tol, max_evals: cfg.parse("max_evals")? })
}

fn verify_options(cfg: &RunConfig) -> Result<VerifyOptions> {
    Ok(VerifyOptions { ratio_cap: cfg.parse("ratio_cap")?, slope_tol: cfg.parse("slope_tol")?, osc: osc_config(cfg)? })
}

fn params(cfg: &RunConfig) -> Result<MlParams> {
    MlParams::new(cfg.parse("alpha")?, cfg.parse("beta")?)
}

fn parse_complex(s: &str) -> Result<Complex64> {
    let (re, im) = match s.split_once(',') {
        Some((a, b)) => (a, b),
        None => (s, "0"),
    };
    let num = |p: &str| p.trim().parse::<f64>().map_err(|e| Error::Parse(format!("z = '{s}': {e}")));
    Ok(Complex64::new(num(re)?, num(im)?))
}

fn geometric(cfg: &RunConfig, key: &str) -> Result<Vec<f64>> {
    let (lo, hi, n) = config::parse_range(cfg.require(key)?)?;
    geometric_grid(lo, hi, n)
}

/// `report` as a JSON object with `kind` and the config echo added.
fn document<T: Serialize>(kind: &str, report: &T, cfg: &RunConfig) -> Result<Value> {
    let mut v = serde_json::to_value(report).map_err(|e| Error::Config(format!("serialize: {e}")))?;
    let obj = v.as_object_mut().ok_or_else(|| Error::Config("report is not an object".into()))?;
    obj.insert("kind".into(), json!(kind));
    obj.insert("config".into(), json!(cfg.echo()));
    Ok(v)
}

fn print_json(out: &mut (dyn Write + Send), v: &Value) -> Result<()> {
    let s = serde_json::to_string_pretty(v).map_err(|e| Error::Config(format!("serialize: {e}")))?;
    writeln!(out, "{s}")?;
    Ok(())
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<f64>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r.iter().map(|v| v.to_string())).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

fn out_path(cfg: &RunConfig, key: &str) -> Option<PathBuf> {
    cfg.get(key).map(PathBuf::from)
}

fn execute(cfg: &RunConfig, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    match cfg.command {
        Command::MlfEval => mlf_eval(cfg, out),
        Command::Oscint => oscint(cfg, out, err),
        Command::DecayVerify => decay_verify(cfg, out, err),
        Command::Rl => rl(cfg, out, err),
        Command::PdeKg | Command::PdeSchrodinger => pde_field(cfg, out, err),
        Command::PdeDecay => pde_decay(cfg, out, err),
        Command::SuiteAcceptance => suite(cfg, out, err),
    }
}

fn mlf_eval(cfg: &RunConfig, out: &mut (dyn Write + Send)) -> Result<i32> {
    let p = params(cfg)?;
    let z = parse_complex(cfg.require("z")?)?;
    let v = match cfg.parse_opt::<u32>("oracle_digits")? {
        Some(d) => ml_eval_oracle(p, z, d)?,
        None => MlEvaluator::with_config(p, ml_config(cfg)?).eval(z, cfg.parse("tol")?)?,
    };
    writeln!(out, "{} {} {} {}", v.re, v.im, v.norm(), v.arg())?;
    Ok(EXIT_OK)
}

fn oscint(cfg: &RunConfig, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    let spec = OscIntegralSpec {
        params: params(cfg)?,
        lambda: cfg.parse("lambda")?,
        phase: cfg.parse::<Phase>("phase")?,
        amplitude: cfg.parse::<Amplitude>("amp")?,
        domain: cfg.parse::<Domain>("domain")?,
        quad_tol: cfg.parse("tol")?,
    };
    spec.validate()?;
    let r = OscIntegrator::new(spec.params, osc_config(cfg)?).integrate(&spec)?;
    writeln!(err, "I = {} {:+}i  |I| = {:.6e}  error <= {:.1e}  ({} evaluations)", r.value_re, r.value_im, r.abs, r.est_error, r.n_evals)?;
    print_json(out, &document("integral", &r, cfg)?)?;
    Ok(EXIT_OK)
}

fn bound_outputs(cfg: &RunConfig, r: &BoundReport, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    if let Some(p) = out_path(cfg, "csv") {
        write_csv(&p, &["lambda", "abs_I", "ratio"], r.samples.iter().map(|s| vec![s.lambda, s.abs_i, s.ratio]))?;
    }
    if let Some(p) = out_path(cfg, "svg") {
        emit_svg(&Plot::decay(r), &p)?;
    }
    let slope = match &r.fit {
        Some(f) => format!("slope {:.4} vs threshold {:.4}", f.slope, r.slope_threshold),
        None => format!("slope not fitted: {}", r.fit_note.as_deref().unwrap_or("-")),
    };
    writeln!(
        err,
        "{} (as {}): {}; max ratio {:.3e} (cap {:e}) -> {}",
        r.setting,
        r.resolved,
        slope,
        r.max_ratio,
        r.ratio_cap,
        if r.pass { "PASS" } else { "FAIL" }
    )?;
    print_json(out, &document("bound", r, cfg)?)?;
    Ok(if r.pass { EXIT_OK } else { EXIT_VERDICT })
}

fn decay_verify(cfg: &RunConfig, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    let id: TheoremId = cfg.parse("theorem")?;
    let grid = geometric(cfg, "grid")?;
    let family = OscIntegralSpec {
        params: params(cfg)?,
        lambda: grid[0],
        phase: cfg.parse::<Phase>("phase")?,
        amplitude: cfg.parse::<Amplitude>("amp")?,
        domain: cfg.parse::<Domain>("domain")?,
        quad_tol: cfg.parse("quad_tol")?,
    };
    let r = verify_bound(&family, &TheoremSetting::new(id), cfg.parse("k")?, &grid, &verify_options(cfg)?)?;
    bound_outputs(cfg, &r, out, err)
}

fn rl(cfg: &RunConfig, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    let grid = geometric(cfg, "grid")?;
    let r = riemann_lebesgue_report(
        &cfg.parse::<Amplitude>("amp")?,
        params(cfg)?,
        cfg.parse::<Domain>("domain")?,
        &grid,
        cfg.parse("quad_tol")?,
        &verify_options(cfg)?,
    )?;
    bound_outputs(cfg, &r, out, err)
}

fn pde_problem(cfg: &RunConfig, model: Model) -> Result<PdeProblem> {
    let (lo, hi, n) = config::parse_range(cfg.require("xgrid")?)?;
    let x_grid = UniformGrid::new(lo, hi, n)?;
    let alpha = cfg.parse("alpha")?;
    let mu = cfg.parse("mu")?;
    let psi: Amplitude = cfg.parse("psi_hat")?;
    let tol = cfg.parse("tol")?;
    let mut p = match model {
        Model::KleinGordon => PdeProblem::klein_gordon(alpha, mu, psi, x_grid, tol)?,
        Model::Schrodinger { gamma } => PdeProblem::schrodinger(alpha, gamma, mu, psi, x_grid, tol)?,
    };
    p.psi_hat_scale = cfg.parse("psi_scale")?;
    p.xi_truncation = cfg.parse_opt("xi_truncation")?;
    p.validate()?;
    Ok(p)
}

fn pde_field(cfg: &RunConfig, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    let model = match cfg.command {
        Command::PdeKg => Model::KleinGordon,
        _ => Model::Schrodinger { gamma: cfg.parse("gamma")? },
    };
    let p = pde_problem(cfg, model)?;
    let snap: FieldSnapshot = PdeSolver::new(p, ml_config(cfg)?)?.solve(cfg.parse("t")?)?;
    if let Some(path) = out_path(cfg, "csv") {
        let vals = snap.values();
        write_csv(&path, &["x", "re", "im", "abs"], snap.x.iter().zip(&vals).map(|(&x, v)| vec![x, v.re, v.im, v.norm()]))?;
    }
    if let Some(path) = out_path(cfg, "svg") {
        emit_svg(&Plot::field(&snap), &path)?;
    }
    writeln!(err, "t = {}: sup|u| = {:.6e}, error <= {:.1e}, {} panels", snap.t, snap.sup_norm, snap.quad_error, snap.panels)?;
    print_json(out, &document("field", &snap, cfg)?)?;
    Ok(EXIT_OK)
}

fn pde_decay(cfg: &RunConfig, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    let model = match cfg.require("model")? {
        "kg" => Model::KleinGordon,
        "schrodinger" => Model::Schrodinger { gamma: cfg.parse("gamma")? },
        other => return Err(Error::Config(format!("model '{other}' is not kg or schrodinger"))),
    };
    let p = pde_problem(cfg, model)?;
    let tg = geometric(cfg, "tgrid")?;
    let r: DispersiveReport = dispersive_check_with(&p, &tg, cfg.parse("ratio_cap")?, ml_config(cfg)?)?;
    if let Some(path) = out_path(cfg, "csv") {
        write_csv(
            &path,
            &["t", "sup_norm", "envelope", "ratio"],
            r.samples.iter().map(|s| vec![s.t, s.sup_norm, s.envelope, s.ratio]),
        )?;
    }
    if let Some(path) = out_path(cfg, "svg") {
        emit_svg(&Plot::dispersive(&r), &path)?;
    }
    writeln!(err, "max ratio {:.4e} (cap {:e}) -> {}", r.max_ratio, r.ratio_cap, if r.pass { "PASS" } else { "FAIL" })?;
    print_json(out, &document("dispersive", &r, cfg)?)?;
    Ok(if r.pass { EXIT_OK } else { EXIT_VERDICT })
}

fn suite(cfg: &RunConfig, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<i32> {
    let ids: Vec<u32> = match cfg.require("criteria")? {
        "all" => ALL_CRITERIA.to_vec(),
        list => list
            .split(',')
            .map(|s| s.trim().parse::<u32>().map_err(|e| Error::Config(format!("criteria '{list}': {e}"))))
            .collect::<Result<_>>()?,
    };
    let r = run_acceptance(&ids, |c| {
        let _ = writeln!(err, "{}", c.line());
    })?;
    writeln!(err, "{} in {:.1}s", if r.pass { "all criteria pass" } else { "some criteria FAIL" }, r.total_seconds)?;
    print_json(out, &document("acceptance", &r, cfg)?)?;
    Ok(if r.pass { EXIT_OK } else { EXIT_VERDICT })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(std::iter::once("mlfc").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn eval_prints_e() {
        let (code, out, _) = run_str(&["mlf", "eval", "--alpha", "1", "--beta", "1", "--z", "1,0"]);
        assert_eq!(code, 0);
        let fields: Vec<f64> = out.split_whitespace().map(|s| s.parse().unwrap()).collect();
        assert_eq!(fields.len(), 4);
        assert!((fields[0] - std::f64::consts::E).abs() < 1e-14);
        assert_eq!(fields[1], 0.0);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(run_str(&["mlf", "eval", "--alpha", "1"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["mlf", "eval", "--alpha", "3", "--beta", "1", "--z", "1"]).0, EXIT_USAGE);
        assert_eq!(run_str(&["nonsense"]).0, EXIT_USAGE);
        assert_eq!(run_str(&[]).0, EXIT_USAGE);
        assert_eq!(run_str(&["--help"]).0, EXIT_OK);
    }

    #[test]
    fn complex_parsing() {
        assert_eq!(parse_complex("1.5,-2").unwrap(), Complex64::new(1.5, -2.0));
        assert_eq!(parse_complex("3").unwrap(), Complex64::new(3.0, 0.0));
        assert!(parse_complex("a,b").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::HypothesisViolation { setting: "T22".into(), clause: "c".into() }), 2);
        assert_eq!(exit_code(&Error::QuadratureFailure { tol: 1e-9, est: 1.0, evals: 1 }), 3);
        assert_eq!(exit_code(&Error::Config("x".into())), 1);
    }
}
