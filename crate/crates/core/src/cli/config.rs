//! Flat `key = value` run configuration.
//!
//! Precedence, lowest first: built-in defaults, the file named by
//! `MLFC_CONFIG`, the file given with `--config`, explicit flags. Keys must be
//! known to at least one command; keys that do not apply to the selected
//! command are ignored and not echoed.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

/// One configurable key: name, default (if any) and help text.
#[derive(Debug, Clone, Copy)]
pub struct Key {
    pub name: &'static str,
    pub default: Option<&'static str>,
    pub help: &'static str,
}

const fn key(name: &'static str, default: Option<&'static str>, help: &'static str) -> Key {
    Key { name, default, help }
}

const THREADS: Key = key("threads", Some("0"), "worker threads, 0 = all cores");
const R0: Key = key("r0", Some("5"), "Taylor-series radius of the evaluator");
const R1: Key = key("r1", Some("40"), "asymptotic-expansion radius of the evaluator");
const ALPHA: Key = key("alpha", None, "Mittag-Leffler alpha");
const BETA: Key = key("beta", None, "Mittag-Leffler beta");
const PHASE: Key = key("phase", None, "phase, e.g. quadratic:c=0");
const AMP: Key = key("amp", Some("one"), "amplitude, e.g. gaussian:sigma=1");
const DOMAIN: Key = key("domain", None, "a,b | line | line:R");
const QUAD_TOL: Key = key("quad_tol", Some("1e-9"), "absolute quadrature tolerance");
const ML_TOL: Key = key("ml_tol", Some("1e-10"), "relative tolerance of the evaluator inside integrals");
const MAX_EVALS: Key = key("max_evals", Some("20000000"), "integrand evaluations allowed per integral");
const GRID: Key = key("grid", Some("10:1e4:16"), "geometric lambda grid lo:hi:n");
const SLOPE_TOL: Key = key("slope_tol", Some("0.07"), "allowance on the fitted slope");
const RATIO_CAP: Key = key("ratio_cap", Some("1e3"), "cap on |I| / envelope");
const SVG: Key = key("svg", None, "write an SVG plot to this path");
const CSV: Key = key("csv", None, "write a CSV table to this path");
const MU: Key = key("mu", None, "mass mu > 0");
const GAMMA: Key = key("gamma", None, "forcing exponent, 0 <= gamma < alpha");
const PSI_HAT: Key = key("psi_hat", Some("gaussian:sigma=1"), "initial data in frequency space");
const PSI_SCALE: Key = key("psi_scale", Some("1"), "factor multiplying psi_hat");
const XI_TRUNC: Key = key("xi_truncation", None, "frequency cutoff; default from the tail of psi_hat");
const XGRID: Key = key("xgrid", Some("-10:10:401"), "uniform x grid lo:hi:n");
const PDE_TOL: Key = key("tol", Some("1e-9"), "absolute tolerance on u(t, x)");

/// The subcommands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Command {
    MlfEval,
    Oscint,
    DecayVerify,
    Rl,
    PdeKg,
    PdeSchrodinger,
    PdeDecay,
    SuiteAcceptance,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::MlfEval,
        Command::Oscint,
        Command::DecayVerify,
        Command::Rl,
        Command::PdeKg,
        Command::PdeSchrodinger,
        Command::PdeDecay,
        Command::SuiteAcceptance,
    ];

    /// `(group, subcommand)`; `rl` and `oscint` have no subcommand.
    pub fn path(self) -> (&'static str, Option<&'static str>) {
        match self {
            Command::MlfEval => ("mlf", Some("eval")),
            Command::Oscint => ("oscint", None),
            Command::DecayVerify => ("decay", Some("verify")),
            Command::Rl => ("rl", None),
            Command::PdeKg => ("pde", Some("kg")),
            Command::PdeSchrodinger => ("pde", Some("schrodinger")),
            Command::PdeDecay => ("pde", Some("decay")),
            Command::SuiteAcceptance => ("suite", Some("acceptance")),
        }
    }

    pub fn about(self) -> &'static str {
        match self {
            Command::MlfEval => "evaluate E_{alpha,beta}(z); prints `re im abs arg`",
            Command::Oscint => "compute I(lambda) = int E(i^alpha lambda phi) psi dx",
            Command::DecayVerify => "check a decay estimate over a lambda grid",
            Command::Rl => "generalized Riemann-Lebesgue decay (phi = x, k = 1)",
            Command::PdeKg => "time-fractional Klein-Gordon solution at time t",
            Command::PdeSchrodinger => "time-fractional Schrodinger solution at time t",
            Command::PdeDecay => "dispersive estimate over a t grid",
            Command::SuiteAcceptance => "run the acceptance battery",
        }
    }

    pub fn keys(self) -> Vec<Key> {
        let osc = [ML_TOL, MAX_EVALS, R0, R1];
        let verdict = [GRID, QUAD_TOL, SLOPE_TOL, RATIO_CAP, SVG, CSV];
        let pde = [PSI_HAT, PSI_SCALE, XI_TRUNC, XGRID, PDE_TOL, R0, R1, SVG, CSV];
        let mut keys = match self {
            Command::MlfEval => vec![
                ALPHA,
                BETA,
                key("z", None, "complex argument RE,IM"),
                key("tol", Some("1e-10"), "relative tolerance"),
                key("oracle_digits", None, "evaluate with the extended-precision oracle at this many digits"),
                R0,
                R1,
            ],
            Command::Oscint => {
                let mut v = vec![
                    ALPHA,
                    BETA,
                    key("lambda", None, "frequency lambda >= 0"),
                    PHASE,
                    AMP,
                    DOMAIN,
                    key("tol", Some("1e-9"), "absolute quadrature tolerance"),
                ];
                v.extend(osc);
                v
            }
            Command::DecayVerify => {
                let mut v = vec![
                    key("theorem", None, "setting: T21i T21ii T21iii T22 T31i T31ii T32i T32ii T33 T34 T35 RL"),
                    ALPHA,
                    BETA,
                    key("k", Some("1"), "derivative order"),
                    PHASE,
                    AMP,
                    DOMAIN,
                ];
                v.extend(verdict);
                v.extend(osc);
                v
            }
            Command::Rl => {
                let mut v = vec![ALPHA, BETA, AMP, key("domain", Some("0,1"), "a,b | line | line:R")];
                v.extend(verdict);
                v.extend(osc);
                v
            }
            Command::PdeKg => {
                let mut v = vec![ALPHA, MU, key("t", None, "time t > 0")];
                v.extend(pde);
                v
            }
            Command::PdeSchrodinger => {
                let mut v = vec![ALPHA, GAMMA, MU, key("t", None, "time t > 0")];
                v.extend(pde);
                v
            }
            Command::PdeDecay => {
                let mut v = vec![
                    key("model", None, "kg | schrodinger"),
                    ALPHA,
                    key("gamma", Some("0"), "forcing exponent (Schrodinger only)"),
                    MU,
                    key("tgrid", Some("1:100:12"), "geometric t grid lo:hi:n"),
                    RATIO_CAP,
                ];
                v.extend(pde);
                v
            }
            Command::SuiteAcceptance => vec![key("criteria", Some("all"), "comma-separated criterion numbers, or all")],
        };
        keys.push(THREADS);
        keys
    }

    pub fn has_key(self, name: &str) -> bool {
        self.keys().iter().any(|k| k.name == name)
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.path() {
            (g, Some(s)) => write!(f, "{g} {s}"),
            (g, None) => write!(f, "{g}"),
        }
    }
}

impl FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let norm = s.split_whitespace().collect::<Vec<_>>().join(" ");
        Command::ALL
            .into_iter()
            .find(|c| c.to_string() == norm)
            .ok_or_else(|| Error::Config(format!("unknown command '{s}'")))
    }
}

fn known_anywhere(name: &str) -> bool {
    name == "command" || Command::ALL.iter().any(|c| c.has_key(name))
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`, got '{raw}'", i + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if !known_anywhere(k) {
            return Err(Error::Config(format!("line {}: unknown key '{k}'", i + 1)));
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key '{k}'", i + 1)));
        }
    }
    Ok(out)
}

pub fn read_config_file(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_text(&text).map_err(|e| match e {
        Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
        other => other,
    })
}

/// The effective configuration of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    values: BTreeMap<String, String>,
}

impl RunConfig {
    /// Layers `sources` (lowest precedence first) over the command defaults.
    pub fn resolve(command: Command, sources: &[&BTreeMap<String, String>]) -> Result<Self> {
        let mut values = BTreeMap::new();
        for k in command.keys() {
            if let Some(d) = k.default {
                values.insert(k.name.to_string(), d.to_string());
            }
        }
        for src in sources {
            for (k, v) in src.iter() {
                if k == "command" {
                    continue;
                }
                if !known_anywhere(k) {
                    return Err(Error::Config(format!("unknown key '{k}'")));
                }
                if command.has_key(k) {
                    values.insert(k.clone(), v.clone());
                }
            }
        }
        Ok(Self { command, values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Config(format!("`{}` needs --{}", self.command, key.replace('_', "-"))))
    }

    pub fn parse<T: FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        let raw = self.require(key)?;
        raw.parse().map_err(|e| Error::Config(format!("{key} = '{raw}': {e}")))
    }

    pub fn parse_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.get(key) {
            None => Ok(None),
            Some(_) => self.parse(key).map(Some),
        }
    }

    /// `command` plus every set key, for the JSON echo.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = self.values.clone();
        m.insert("command".into(), self.command.to_string());
        m
    }

    /// The echo as config-file text; feeding it back reproduces the run.
    pub fn to_text(&self) -> String {
        self.echo().iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

/// `lo:hi:n` as three numbers.
pub fn parse_range(s: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!("grid '{s}' must be lo:hi:n")));
    }
    let num = |p: &str| p.trim().parse::<f64>().map_err(|e| Error::Parse(format!("grid '{s}': {e}")));
    let n = parts[2].trim().parse::<usize>().map_err(|e| Error::Parse(format!("grid '{s}': {e}")))?;
    Ok((num(parts[0])?, num(parts[1])?, n))
}
