use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The parameter pair `(α, β)` of `E_{α,β}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlParams {
    alpha: f64,
    beta: f64,
}

/// Parameter regimes that select the decay estimates. A parameter pair carries
/// every tag it satisfies; `Other` is present only when none of the rest is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Regime {
    /// β ≥ α + 1
    BetaAtLeastAlphaPlusOne,
    /// 1 < β < α + 1
    BetaBetweenOneAndAlphaPlusOne,
    /// β = 1
    BetaIsOne,
    /// β = α
    BetaIsAlpha,
    Other,
}

impl MlParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::InvalidParams(format!("alpha = {alpha} not in (0, 2]")));
        }
        if !beta.is_finite() {
            return Err(Error::InvalidParams(format!("beta = {beta} is not finite")));
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn regimes(&self) -> Vec<Regime> {
        let (a, b) = (self.alpha, self.beta);
        let mut tags = Vec::new();
        if b >= a + 1.0 {
            tags.push(Regime::BetaAtLeastAlphaPlusOne);
        }
        if b > 1.0 && b < a + 1.0 {
            tags.push(Regime::BetaBetweenOneAndAlphaPlusOne);
        }
        if b == 1.0 {
            tags.push(Regime::BetaIsOne);
        }
        if b == a {
            tags.push(Regime::BetaIsAlpha);
        }
        if tags.is_empty() {
            tags.push(Regime::Other);
        }
        tags
    }

    pub fn has_regime(&self, r: Regime) -> bool {
        self.regimes().contains(&r)
    }

    pub fn alpha_is_two(&self) -> bool {
        self.alpha == 2.0
    }
}

impl std::fmt::Display for MlParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(alpha={}, beta={})", self.alpha, self.beta)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_alpha_out_of_range() {
        assert!(MlParams::new(0.0, 1.0).is_err());
        assert!(MlParams::new(2.5, 1.0).is_err());
        assert!(MlParams::new(2.0, 1.0).is_ok());
        assert!(MlParams::new(1.0, f64::NAN).is_err());
    }

    #[test]
    fn overlapping_tags() {
        let p = MlParams::new(1.0, 1.0).unwrap();
        assert_eq!(p.regimes(), vec![Regime::BetaIsOne, Regime::BetaIsAlpha]);
        let p = MlParams::new(0.5, 2.0).unwrap();
        assert_eq!(p.regimes(), vec![Regime::BetaAtLeastAlphaPlusOne]);
        let p = MlParams::new(0.5, 0.8).unwrap();
        assert_eq!(p.regimes(), vec![Regime::Other]);
        let p = MlParams::new(1.2, 1.2).unwrap();
        assert_eq!(
            p.regimes(),
            vec![Regime::BetaBetweenOneAndAlphaPlusOne, Regime::BetaIsAlpha]
        );
    }

    proptest! {
        #[test]
        fn classification_is_total(alpha in 0.01f64..=2.0, beta in -3.0f64..5.0) {
            let p = MlParams::new(alpha, beta).unwrap();
            let tags = p.regimes();
            prop_assert!(!tags.is_empty());
            // `Other` never coexists with a named regime.
            prop_assert!(!(tags.contains(&Regime::Other) && tags.len() > 1));
            // The two β-bands are disjoint.
            prop_assert!(!(tags.contains(&Regime::BetaAtLeastAlphaPlusOne)
                && tags.contains(&Regime::BetaBetweenOneAndAlphaPlusOne)));
        }
    }
}
