//! Closed-form phase and amplitude families with exact derivatives and
//! certified derivative bounds.
//!
//! Text grammar (used by the CLI and config files), `family:key=value,...`:
//!
//! ```text
//! phase      := affine:a=A,b=B | monomial:k=K,c=C | quadratic:c=C
//!             | shifted_power:k=K,c=C | mass_shell:mu=M
//! amplitude  := one | indicator:a=A,b=B | gaussian:sigma=S
//!             | poly:coeffs=C0;C1;... | bump:a=A,b=B
//! domain     := A,B | line | line:R
//! ```
//!
//! Printing uses the shortest round-trip float format, so parse → print →
//! parse is the identity.

mod amplitude;
mod phase;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use amplitude::{Amplitude, BUMP_INTEGRAL};
pub use phase::{Phase, PhaseCert, PowerForm, MAX_ORDER};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    Interval { a: f64, b: f64 },
    /// The real line; `radius` is an explicit truncation `[−R, R]`.
    WholeLine { radius: Option<f64> },
}

impl Domain {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidParams(format!("interval [{a}, {b}] must be finite with a < b")));
        }
        Ok(Domain::Interval { a, b })
    }

    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Domain::Interval { a, b } => x >= a && x <= b,
            Domain::WholeLine { .. } => x.is_finite(),
        }
    }

    pub fn contains_interior(&self, x: f64) -> bool {
        match *self {
            Domain::Interval { a, b } => x > a && x < b,
            Domain::WholeLine { .. } => x.is_finite(),
        }
    }

    pub fn is_whole_line(&self) -> bool {
        matches!(self, Domain::WholeLine { .. })
    }
}

fn fields<'a>(body: &'a str, family: &str, keys: &[&str]) -> Result<BTreeMap<&'a str, &'a str>> {
    let mut map = BTreeMap::new();
    if !body.is_empty() {
        for part in body.split(',') {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("{family}: expected key=value, got '{part}'")))?;
            let k = k.trim();
            if !keys.contains(&k) {
                return Err(Error::Parse(format!("{family}: unknown key '{k}' (expected {})", keys.join(", "))));
            }
            if map.insert(k, v.trim()).is_some() {
                return Err(Error::Parse(format!("{family}: duplicate key '{k}'")));
            }
        }
    }
    for k in keys {
        if !map.contains_key(k) {
            return Err(Error::Parse(format!("{family}: missing key '{k}'")));
        }
    }
    Ok(map)
}

fn num(s: &str) -> Result<f64> {
    let v: f64 = s.trim().parse().map_err(|_| Error::Parse(format!("not a number: '{s}'")))?;
    if !v.is_finite() {
        return Err(Error::Parse(format!("not a finite number: '{s}'")));
    }
    Ok(v)
}

fn int(s: &str) -> Result<u32> {
    s.trim().parse().map_err(|_| Error::Parse(format!("not a non-negative integer: '{s}'")))
}

fn split_family(s: &str) -> (&str, &str) {
    match s.trim().split_once(':') {
        Some((f, b)) => (f.trim(), b.trim()),
        None => (s.trim(), ""),
    }
}

impl FromStr for Phase {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (family, body) = split_family(s);
        let p = match family {
            "affine" => {
                let f = fields(body, family, &["a", "b"])?;
                Phase::Affine { a: num(f["a"])?, b: num(f["b"])? }
            }
            "monomial" => {
                let f = fields(body, family, &["k", "c"])?;
                Phase::Monomial { k: int(f["k"])?, c: num(f["c"])? }
            }
            "quadratic" => Phase::Quadratic { c: num(fields(body, family, &["c"])?["c"])? },
            "shifted_power" => {
                let f = fields(body, family, &["k", "c"])?;
                Phase::ShiftedPower { k: int(f["k"])?, c: num(f["c"])? }
            }
            "mass_shell" => Phase::MassShell { mu: num(fields(body, family, &["mu"])?["mu"])? },
            _ => return Err(Error::Parse(format!("unknown phase family '{family}'"))),
        };
        p.validate()?;
        Ok(p)
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Phase::Affine { a, b } => write!(f, "affine:a={a},b={b}"),
            Phase::Monomial { k, c } => write!(f, "monomial:k={k},c={c}"),
            Phase::Quadratic { c } => write!(f, "quadratic:c={c}"),
            Phase::ShiftedPower { k, c } => write!(f, "shifted_power:k={k},c={c}"),
            Phase::MassShell { mu } => write!(f, "mass_shell:mu={mu}"),
        }
    }
}

impl FromStr for Amplitude {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (family, body) = split_family(s);
        let a = match family {
            "one" => {
                fields(body, family, &[])?;
                Amplitude::One
            }
            "indicator" => {
                let f = fields(body, family, &["a", "b"])?;
                Amplitude::Indicator { a: num(f["a"])?, b: num(f["b"])? }
            }
            "gaussian" => Amplitude::Gaussian { sigma: num(fields(body, family, &["sigma"])?["sigma"])? },
            "poly" => {
                let f = fields(body, family, &["coeffs"])?;
                let coeffs = f["coeffs"].split(';').map(num).collect::<Result<Vec<_>>>()?;
                Amplitude::Poly { coeffs }
            }
            "bump" => {
                let f = fields(body, family, &["a", "b"])?;
                Amplitude::SmoothBump { a: num(f["a"])?, b: num(f["b"])? }
            }
            _ => return Err(Error::Parse(format!("unknown amplitude family '{family}'"))),
        };
        a.validate()?;
        Ok(a)
    }
}

impl fmt::Display for Amplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Amplitude::One => write!(f, "one"),
            Amplitude::Indicator { a, b } => write!(f, "indicator:a={a},b={b}"),
            Amplitude::Gaussian { sigma } => write!(f, "gaussian:sigma={sigma}"),
            Amplitude::Poly { coeffs } => {
                let c: Vec<String> = coeffs.iter().map(|c| c.to_string()).collect();
                write!(f, "poly:coeffs={}", c.join(";"))
            }
            Amplitude::SmoothBump { a, b } => write!(f, "bump:a={a},b={b}"),
        }
    }
}

impl FromStr for Domain {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "line" {
            return Ok(Domain::WholeLine { radius: None });
        }
        if let Some(r) = s.strip_prefix("line:") {
            let r = num(r)?;
            if r <= 0.0 {
                return Err(Error::Parse(format!("truncation radius must be positive, got {r}")));
            }
            return Ok(Domain::WholeLine { radius: Some(r) });
        }
        let (a, b) = s
            .split_once(',')
            .ok_or_else(|| Error::Parse(format!("domain must be 'a,b', 'line' or 'line:R', got '{s}'")))?;
        Domain::interval(num(a)?, num(b)?)
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::Interval { a, b } => write!(f, "{a},{b}"),
            Domain::WholeLine { radius: None } => write!(f, "line"),
            Domain::WholeLine { radius: Some(r) } => write!(f, "line:{r}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_examples() {
        assert_eq!("quadratic:c=0".parse::<Phase>().unwrap(), Phase::Quadratic { c: 0.0 });
        assert_eq!("affine:b=-1,a=3".parse::<Phase>().unwrap(), Phase::Affine { a: 3.0, b: -1.0 });
        assert_eq!("gaussian:sigma=1".parse::<Amplitude>().unwrap(), Amplitude::Gaussian { sigma: 1.0 });
        assert_eq!(
            "poly:coeffs=1;0;2".parse::<Amplitude>().unwrap(),
            Amplitude::Poly { coeffs: vec![1.0, 0.0, 2.0] }
        );
        assert_eq!("one".parse::<Amplitude>().unwrap(), Amplitude::One);
        assert_eq!("line:12.5".parse::<Domain>().unwrap(), Domain::WholeLine { radius: Some(12.5) });
        assert_eq!("0,1".parse::<Domain>().unwrap(), Domain::Interval { a: 0.0, b: 1.0 });
    }

    #[test]
    fn parse_errors() {
        assert!("quadratic".parse::<Phase>().is_err());
        assert!("quadratic:c=0,d=1".parse::<Phase>().is_err());
        assert!("cubic:c=0".parse::<Phase>().is_err());
        assert!("mass_shell:mu=-1".parse::<Phase>().is_err());
        assert!("monomial:k=0,c=0".parse::<Phase>().is_err());
        assert!("gaussian:sigma=0".parse::<Amplitude>().is_err());
        assert!("indicator:a=1,b=0".parse::<Amplitude>().is_err());
        assert!("1,0".parse::<Domain>().is_err());
        assert!("line:0".parse::<Domain>().is_err());
        assert!("quadratic:c=nan".parse::<Phase>().is_err());
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop_oneof![-1e6..1e6f64, any::<f64>().prop_filter("finite", |x| x.is_finite())]
    }

    fn phase() -> impl Strategy<Value = Phase> {
        prop_oneof![
            (finite(), finite()).prop_map(|(a, b)| Phase::Affine { a, b }),
            (1u32..=8, finite()).prop_map(|(k, c)| Phase::Monomial { k, c }),
            finite().prop_map(|c| Phase::Quadratic { c }),
            (1u32..=8, finite()).prop_map(|(k, c)| Phase::ShiftedPower { k, c }),
            (1e-9..1e9f64).prop_map(|mu| Phase::MassShell { mu }),
        ]
    }

    fn amplitude() -> impl Strategy<Value = Amplitude> {
        prop_oneof![
            Just(Amplitude::One),
            (finite(), 1e-6..1e3f64).prop_map(|(a, w)| Amplitude::Indicator { a, b: a + w }),
            (1e-6..1e6f64).prop_map(|sigma| Amplitude::Gaussian { sigma }),
            proptest::collection::vec(finite(), 1..6).prop_map(|coeffs| Amplitude::Poly { coeffs }),
            (finite(), 1e-6..1e3f64).prop_map(|(a, w)| Amplitude::SmoothBump { a, b: a + w }),
        ]
    }

    proptest! {
        #[test]
        fn phase_round_trip(p in phase()) {
            let text = p.to_string();
            let back: Phase = text.parse().unwrap();
            prop_assert_eq!(back, p);
            prop_assert_eq!(back.to_string(), text);
        }

        #[test]
        fn amplitude_round_trip(a in amplitude()) {
            prop_assume!(a.validate().is_ok());
            let text = a.to_string();
            let back: Amplitude = text.parse().unwrap();
            prop_assert_eq!(back.to_string(), text);
            prop_assert_eq!(back, a);
        }

        #[test]
        fn domain_round_trip(a in finite(), w in 1e-3..1e3f64, r in 1e-3..1e6f64, which in 0u8..3) {
            let d = match which {
                0 => Domain::Interval { a, b: a + w },
                1 => Domain::WholeLine { radius: None },
                _ => Domain::WholeLine { radius: Some(r) },
            };
            prop_assume!(!matches!(d, Domain::Interval { a, b } if a >= b));
            let back: Domain = d.to_string().parse().unwrap();
            prop_assert_eq!(back, d);
        }
    }
}
