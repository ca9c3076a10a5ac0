//! Convex Lipschitz losses with a subgradient in the prediction.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    Hinge,
    Logistic,
    Squared,
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::Hinge => "hinge",
            LossKind::Logistic => "logistic",
            LossKind::Squared => "squared",
        })
    }
}

impl FromStr for LossKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hinge" => Ok(LossKind::Hinge),
            "logistic" => Ok(LossKind::Logistic),
            "squared" => Ok(LossKind::Squared),
            other => Err(Error::param(format!("unknown loss kind {other:?}"))),
        }
    }
}

/// A loss together with its declared Lipschitz constant `L`.
///
/// Hinge and logistic are 1-Lipschitz for labels in {-1, +1}. The squared
/// loss is not globally Lipschitz; the caller declares the bound that holds
/// over the range of predictions it expects. Predictions are never clipped,
/// the constant only enters step sizes and bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub kind: LossKind,
    pub lipschitz: f64,
}

impl LossSpec {
    pub fn hinge() -> Self {
        Self {
            kind: LossKind::Hinge,
            lipschitz: 1.0,
        }
    }

    pub fn logistic() -> Self {
        Self {
            kind: LossKind::Logistic,
            lipschitz: 1.0,
        }
    }

    pub fn squared(clip: f64) -> Result<Self> {
        if !(clip.is_finite() && clip > 0.0) {
            return Err(Error::param(format!(
                "squared loss needs a positive Lipschitz bound, got {clip}"
            )));
        }
        Ok(Self {
            kind: LossKind::Squared,
            lipschitz: clip,
        })
    }

    /// Builds a spec; `clip` is only consulted for the squared loss.
    pub fn from_kind(kind: LossKind, clip: Option<f64>) -> Result<Self> {
        match kind {
            LossKind::Hinge => Ok(Self::hinge()),
            LossKind::Logistic => Ok(Self::logistic()),
            LossKind::Squared => Self::squared(clip.ok_or_else(|| {
                Error::param("squared loss requires a clip bound for its Lipschitz constant")
            })?),
        }
    }

    pub fn value(&self, prediction: f64, label: f64) -> f64 {
        match self.kind {
            LossKind::Hinge => (1.0 - label * prediction).max(0.0),
            LossKind::Logistic => softplus(-label * prediction),
            LossKind::Squared => {
                let r = prediction - label;
                r * r
            }
        }
    }

    /// A subgradient in the prediction argument. The hinge kink returns 0.
    pub fn subgradient(&self, prediction: f64, label: f64) -> f64 {
        match self.kind {
            LossKind::Hinge => {
                if label * prediction < 1.0 {
                    -label
                } else {
                    0.0
                }
            }
            LossKind::Logistic => -label * sigmoid(-label * prediction),
            LossKind::Squared => 2.0 * (prediction - label),
        }
    }
}

// log(1 + e^z) without overflow
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hinge_values() {
        let h = LossSpec::hinge();
        assert_eq!(h.value(1.0, 1.0), 0.0);
        assert_eq!(h.value(0.0, 1.0), 1.0);
        assert_eq!(h.subgradient(0.0, 1.0), -1.0);
        assert_eq!(h.subgradient(2.0, 1.0), 0.0);
        // kink: 0 is inside the subdifferential [-1, 0]
        let g = h.subgradient(1.0, 1.0);
        assert_eq!(g, 0.0);
        assert!((-1.0..=0.0).contains(&g));
    }

    #[test]
    fn squared_and_logistic_values() {
        let s = LossSpec::squared(4.0).unwrap();
        assert_eq!(s.value(0.5, 1.0), 0.25);
        assert_eq!(s.subgradient(0.5, 1.0), -1.0);
        let l = LossSpec::logistic();
        assert!((l.value(0.0, 1.0) - 2f64.ln()).abs() < 1e-15);
        assert!((l.subgradient(0.0, 1.0) + 0.5).abs() < 1e-15);
        // no overflow far out in either tail
        assert!(l.value(-1000.0, 1.0).is_finite());
        assert_eq!(l.value(1000.0, 1.0), 0.0);
    }

    #[test]
    fn squared_needs_clip() {
        assert!(LossSpec::from_kind(LossKind::Squared, None).is_err());
        assert!(LossSpec::squared(0.0).is_err());
        assert_eq!(LossSpec::from_kind(LossKind::Hinge, Some(3.0)).unwrap().lipschitz, 1.0);
    }

    fn specs() -> impl Strategy<Value = LossSpec> {
        prop_oneof![
            Just(LossSpec::hinge()),
            Just(LossSpec::logistic()),
            Just(LossSpec::squared(10.0).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn midpoint_convexity(spec in specs(), a in -5.0f64..5.0, b in -5.0f64..5.0, y in prop_oneof![Just(-1.0), Just(1.0)]) {
            let mid = spec.value(0.5 * (a + b), y);
            let avg = 0.5 * (spec.value(a, y) + spec.value(b, y));
            prop_assert!(mid <= avg + 1e-12);
        }

        // operating range |p| <= 2 keeps |2(p - y)| <= 6 < 10 for the squared loss
        #[test]
        fn subgradient_bounded_and_valid(spec in specs(), p in -2.0f64..2.0, q in -5.0f64..5.0, y in prop_oneof![Just(-1.0), Just(1.0)]) {
            let g = spec.subgradient(p, y);
            prop_assert!(g.abs() <= spec.lipschitz);
            // supporting line: l(q) >= l(p) + g (q - p)
            prop_assert!(spec.value(q, y) >= spec.value(p, y) + g * (q - p) - 1e-12);
        }
    }
}
