//! Systems of probability measures on `S` indexed by a poset `A`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::{stoch_leq, Measure, MeasureDoc};
use crate::poset::{Poset, PosetDoc, DEFAULT_UPSET_CAP};
use crate::rational;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonotoneSystem {
    pub a: Poset,
    pub s: Poset,
    /// One probability measure per element of `a`.
    pub measures: Vec<Measure>,
}

impl MonotoneSystem {
    pub fn new(a: Poset, s: Poset, measures: Vec<Measure>) -> Result<MonotoneSystem> {
        if measures.len() != a.len() {
            return Err(Error::SizeMismatch {
                expected: a.len(),
                got: measures.len(),
            });
        }
        for m in &measures {
            if m.len() != s.len() {
                return Err(Error::SizeMismatch {
                    expected: s.len(),
                    got: m.len(),
                });
            }
            if !m.is_probability() {
                return Err(Error::TotalMismatch(rational::format(&m.total()), "1".into()));
            }
        }
        Ok(MonotoneSystem { a, s, measures })
    }

    /// First strictly comparable pair `α < β` with `P_α ⋠ P_β`.
    pub fn monotonicity_violation(&self, cap: usize) -> Result<Option<(usize, usize)>> {
        for (x, y) in self.a.strict_pairs() {
            if !stoch_leq(&self.measures[x], &self.measures[y], &self.s, cap)? {
                return Ok(Some((x, y)));
            }
        }
        Ok(None)
    }

    pub fn check_monotone(&self, cap: usize) -> Result<()> {
        match self.monotonicity_violation(cap)? {
            None => Ok(()),
            Some((x, y)) => Err(Error::NotStochasticallyMonotone {
                lower: self.a.label(x).to_string(),
                upper: self.a.label(y).to_string(),
            }),
        }
    }

    pub fn is_monotone(&self) -> bool {
        matches!(self.monotonicity_violation(DEFAULT_UPSET_CAP), Ok(None))
    }

    pub fn to_doc(&self) -> SystemDoc {
        SystemDoc {
            index_poset: self.a.to_doc(),
            target_poset: self.s.to_doc(),
            measures: self
                .a
                .elements()
                .map(|g| (self.a.label(g).to_string(), self.measures[g].to_doc(&self.s).mass))
                .collect(),
        }
    }

    pub fn from_doc(doc: &SystemDoc) -> Result<MonotoneSystem> {
        let a = Poset::from_doc(&doc.index_poset)?;
        let s = Poset::from_doc(&doc.target_poset)?;
        let mut measures = Vec::with_capacity(a.len());
        for g in a.elements() {
            let mass = doc
                .measures
                .get(a.label(g))
                .ok_or_else(|| Error::Parse(format!("no measure for `{}`", a.label(g))))?;
            let m = Measure::from_doc(
                &s,
                &MeasureDoc {
                    poset: None,
                    mass: mass.clone(),
                },
            )?;
            measures.push(m);
        }
        for l in doc.measures.keys() {
            a.index_of(l)?;
        }
        MonotoneSystem::new(a, s, measures)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("serializable")
    }

    pub fn parse(text: &str) -> Result<MonotoneSystem> {
        let doc: SystemDoc = serde_json::from_str(text)?;
        MonotoneSystem::from_doc(&doc)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SystemDoc {
    pub index_poset: PosetDoc,
    pub target_poset: PosetDoc,
    pub measures: BTreeMap<String, BTreeMap<String, String>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    #[test]
    fn round_trip_and_monotonicity() {
        let a = Poset::from_labels(&["lo", "hi"], &[("lo", "hi")]).unwrap();
        let s = Poset::from_labels(&["x", "y"], &[("x", "y")]).unwrap();
        let sys = MonotoneSystem::new(
            a.clone(),
            s.clone(),
            vec![
                Measure::new(vec![ratio(2, 3), ratio(1, 3)]).unwrap(),
                Measure::new(vec![ratio(1, 3), ratio(2, 3)]).unwrap(),
            ],
        )
        .unwrap();
        assert!(sys.is_monotone());
        let back = MonotoneSystem::parse(&sys.to_json()).unwrap();
        assert_eq!(back, sys);
        let bad = MonotoneSystem::new(a, s, vec![sys.measures[1].clone(), sys.measures[0].clone()])
            .unwrap();
        assert_eq!(
            bad.check_monotone(20).unwrap_err(),
            Error::NotStochasticallyMonotone {
                lower: "lo".into(),
                upper: "hi".into()
            }
        );
    }

    #[test]
    fn rejects_sub_probability() {
        let a = Poset::from_labels(&["g"], &[]).unwrap();
        let s = Poset::from_labels(&["x", "y"], &[("x", "y")]).unwrap();
        let m = Measure::new(vec![ratio(1, 3), ratio(1, 3)]).unwrap();
        assert!(MonotoneSystem::new(a, s, vec![m]).is_err());
    }
}
