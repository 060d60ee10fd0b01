//! Objective interestingness measures computed from contingency tables.
//!
//! The analysis screens label support "Sup" and confidence "Cov". Note that
//! "Cov" there means confidence, not the coverage measure below.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gart::ContingencyTable;
use crate::model::MiningParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    Support,
    Confidence,
    Coverage,
    Lift,
    Leverage,
    Conviction,
}

impl Measure {
    pub const ALL: [Measure; 6] = [
        Measure::Support,
        Measure::Confidence,
        Measure::Coverage,
        Measure::Lift,
        Measure::Leverage,
        Measure::Conviction,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Support => "support",
            Measure::Confidence => "confidence",
            Measure::Coverage => "coverage",
            Measure::Lift => "lift",
            Measure::Leverage => "leverage",
            Measure::Conviction => "conviction",
        }
    }

    /// Short column label used by the analysis screens.
    pub fn label(self) -> &'static str {
        match self {
            Measure::Support => "Sup",
            Measure::Confidence => "Cov",
            Measure::Coverage => "Coverage",
            Measure::Lift => "Lift",
            Measure::Leverage => "Leverage",
            Measure::Conviction => "Conviction",
        }
    }

    pub fn vocabulary() -> String {
        Measure::ALL.map(Measure::name).join(", ")
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                Error::Query(format!(
                    "unknown measure {s:?}; valid measures are {}",
                    Measure::vocabulary()
                ))
            })
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Measure values; `None` where a measure is undefined or not selected.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MeasureVector {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confidence: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lift: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leverage: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conviction: Option<f64>,
}

impl MeasureVector {
    pub fn get(&self, m: Measure) -> Option<f64> {
        match m {
            Measure::Support => self.support,
            Measure::Confidence => self.confidence,
            Measure::Coverage => self.coverage,
            Measure::Lift => self.lift,
            Measure::Leverage => self.leverage,
            Measure::Conviction => self.conviction,
        }
    }

    fn slot(&mut self, m: Measure) -> &mut Option<f64> {
        match m {
            Measure::Support => &mut self.support,
            Measure::Confidence => &mut self.confidence,
            Measure::Coverage => &mut self.coverage,
            Measure::Lift => &mut self.lift,
            Measure::Leverage => &mut self.leverage,
            Measure::Conviction => &mut self.conviction,
        }
    }

    /// Keeps only the listed measures.
    pub fn restricted(&self, keep: &[Measure]) -> MeasureVector {
        let mut out = MeasureVector::default();
        for &m in keep {
            *out.slot(m) = self.get(m);
        }
        out
    }
}

pub fn measures_from_table(ct: &ContingencyTable) -> Result<MeasureVector> {
    if ct.n == 0 {
        return Err(Error::EmptyTable);
    }
    let n = ct.n as f64;
    let lhs = ct.lhs_count() as f64;
    let rhs = ct.rhs_count() as f64;
    let support = ct.n_lr as f64 / n;
    let coverage = lhs / n;
    let rhs_freq = rhs / n;
    let confidence = (ct.lhs_count() > 0).then(|| ct.n_lr as f64 / lhs);
    let lift = confidence.filter(|_| ct.rhs_count() > 0).map(|c| c / rhs_freq);
    let leverage = support - coverage * rhs_freq;
    let conviction = confidence
        .filter(|&c| c < 1.0)
        .map(|c| (1.0 - rhs_freq) / (1.0 - c));
    Ok(MeasureVector {
        support: Some(support),
        confidence,
        coverage: Some(coverage),
        lift,
        leverage: Some(leverage),
        conviction,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdFlags {
    pub below_min_support: bool,
    pub below_min_confidence: bool,
}

impl ThresholdFlags {
    pub fn any(&self) -> bool {
        self.below_min_support || self.below_min_confidence
    }
}

/// Absent measures never count as below a threshold.
pub fn flag_thresholds(v: &MeasureVector, params: &MiningParams) -> ThresholdFlags {
    ThresholdFlags {
        below_min_support: v.support.is_some_and(|s| s < params.min_support),
        below_min_confidence: v.confidence.is_some_and(|c| c < params.min_confidence),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn certain_rule_has_no_conviction() {
        let v = measures_from_table(&ContingencyTable::new(4, 0, 2, 1)).unwrap();
        assert_eq!(v.support, Some(4.0 / 7.0));
        assert_eq!(v.confidence, Some(1.0));
        assert_eq!(v.coverage, Some(4.0 / 7.0));
        assert_eq!(v.conviction, None);
        assert_eq!(v.lift, Some(1.0 / (6.0 / 7.0)));
    }

    #[test]
    fn independence_gives_unit_lift() {
        // P(l) = 1/2, P(r) = 1/2, P(lr) = 1/4
        let v = measures_from_table(&ContingencyTable::new(2, 2, 2, 2)).unwrap();
        assert_eq!(v.leverage, Some(0.0));
        assert_eq!(v.lift, Some(1.0));
        assert_eq!(v.conviction, Some(1.0));
    }

    #[test]
    fn undefined_measures_are_absent() {
        let v = measures_from_table(&ContingencyTable::new(0, 0, 3, 1)).unwrap();
        assert_eq!(v.confidence, None);
        assert_eq!(v.lift, None);
        assert_eq!(v.conviction, None);
        assert_eq!(v.support, Some(0.0));

        let v = measures_from_table(&ContingencyTable::new(0, 3, 0, 1)).unwrap();
        assert_eq!(v.confidence, Some(0.0));
        assert_eq!(v.lift, None);

        assert_eq!(measures_from_table(&ContingencyTable::new(0, 0, 0, 0)), Err(Error::EmptyTable));
    }

    #[test]
    fn flags() {
        let params = MiningParams::default();
        let v = MeasureVector { support: Some(0.3), confidence: Some(0.9), ..Default::default() };
        let f = flag_thresholds(&v, &params);
        assert!(f.below_min_support);
        assert!(!f.below_min_confidence);
        let v = MeasureVector { support: Some(0.6), confidence: None, ..Default::default() };
        assert_eq!(flag_thresholds(&v, &params), ThresholdFlags::default());
    }

    #[test]
    fn measure_names() {
        assert_eq!("lift".parse::<Measure>().unwrap(), Measure::Lift);
        let err = "Sup".parse::<Measure>().unwrap_err();
        assert!(err.to_string().contains("support, confidence, coverage, lift, leverage, conviction"));
        assert_eq!(Measure::Confidence.label(), "Cov");
    }

    proptest! {
        #[test]
        fn measures_respect_their_ranges(a in 0u64..50, b in 0u64..50, c in 0u64..50, d in 0u64..50) {
            prop_assume!(a + b + c + d > 0);
            let ct = ContingencyTable::new(a, b, c, d);
            let v = measures_from_table(&ct).unwrap();
            let s = v.support.unwrap();
            prop_assert!(s <= v.coverage.unwrap());
            prop_assert!(s <= (a + c) as f64 / ct.n as f64);
            for m in [v.support, v.confidence, v.coverage].into_iter().flatten() {
                prop_assert!((0.0..=1.0).contains(&m));
            }
            if let Some(l) = v.lift { prop_assert!(l >= 0.0); }
            let lev = v.leverage.unwrap();
            prop_assert!((-0.25..=0.25).contains(&lev));
            if let Some(cv) = v.conviction { prop_assert!(cv >= 0.0); }
        }
    }
}
