//! Brute-force verifiers independent of the constructive pipeline: exact LP
//! feasibility over monotone maps and max-flow couplings.

pub mod flow;
pub mod lp;
pub mod maps;

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measures::Measure;
use crate::rational::{self, Rational};
use crate::system::MonotoneSystem;
use crate::transforms::StepMap;

pub use flow::{check_coupling, strassen_pair, Coupling};
pub use maps::{count_monotone_maps, enumerate_monotone_maps, is_monotone_map, DEFAULT_MAP_CAP};

/// Outcome of the realizability LP.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeasibilityVerdict {
    pub feasible: bool,
    /// Weighted monotone maps whose marginals reproduce the system.
    pub witness: Vec<(Vec<usize>, Rational)>,
    /// Farkas vector indexed by `γ * |S| + x`.
    pub certificate: Option<Vec<Rational>>,
    pub map_count: usize,
}

/// Decides whether the system admits a monotone joint realization.
pub fn realizably_monotone(sys: &MonotoneSystem, cap: usize) -> Result<FeasibilityVerdict> {
    let maps = enumerate_monotone_maps(&sys.a, &sys.s, cap)?;
    let width = sys.s.len();
    let b: Vec<Rational> = sys
        .measures
        .iter()
        .flat_map(|m| m.masses().iter().cloned())
        .collect();
    Ok(match lp::solve(&maps, width, &b) {
        lp::LpOutcome::Feasible(w) => FeasibilityVerdict {
            feasible: true,
            witness: w.into_iter().map(|(j, v)| (maps[j].clone(), v)).collect(),
            certificate: None,
            map_count: maps.len(),
        },
        lp::LpOutcome::Infeasible(y) => FeasibilityVerdict {
            feasible: false,
            witness: Vec::new(),
            certificate: Some(y),
            map_count: maps.len(),
        },
    })
}

/// Marginals of a weighted family of maps.
pub fn witness_marginals(sys: &MonotoneSystem, witness: &[(Vec<usize>, Rational)]) -> Vec<Measure> {
    let mut out = vec![Measure::zero(sys.s.len()); sys.a.len()];
    for (m, w) in witness {
        for (g, &x) in m.iter().enumerate() {
            out[g].add_mass(x, w);
        }
    }
    out
}

/// Replays a verdict: witness marginals and monotonicity, or the Farkas
/// inequalities over every monotone map.
pub fn check_verdict(sys: &MonotoneSystem, v: &FeasibilityVerdict, cap: usize) -> Result<bool> {
    if v.feasible {
        let ok = v.witness.iter().all(|(m, w)| {
            !w.is_negative() && is_monotone_map(&sys.a, &sys.s, m)
        }) && witness_marginals(sys, &v.witness) == sys.measures;
        return Ok(ok);
    }
    let Some(y) = &v.certificate else {
        return Ok(false);
    };
    let width = sys.s.len();
    if y.len() != width * sys.a.len() {
        return Ok(false);
    }
    let yb: Rational = sys
        .measures
        .iter()
        .enumerate()
        .flat_map(|(g, m)| {
            m.masses()
                .iter()
                .enumerate()
                .map(move |(x, p)| (g * width + x, p))
        })
        .map(|(r, p)| &y[r] * p)
        .sum();
    if !yb.is_positive() {
        return Ok(false);
    }
    let maps = enumerate_monotone_maps(&sys.a, &sys.s, cap)?;
    Ok(maps.iter().all(|m| {
        let s: Rational = m.iter().enumerate().map(|(g, &x)| &y[g * width + x]).sum();
        !s.is_positive()
    }))
}

/// Reads a realization as a weighted family of maps: one map per cell of
/// the common refinement of all breakpoints.
pub fn realization_to_witness(
    sys: &MonotoneSystem,
    maps: &[StepMap],
) -> Result<Vec<(Vec<usize>, Rational)>> {
    if maps.len() != sys.a.len() {
        return Err(Error::SizeMismatch {
            expected: sys.a.len(),
            got: maps.len(),
        });
    }
    let mut cuts: Vec<Rational> = maps.iter().flat_map(|m| m.breakpoints()).collect();
    cuts.sort();
    cuts.dedup();
    let mut acc: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
    for w in cuts.windows(2) {
        let assign = maps
            .iter()
            .map(|m| crate::transforms::eval(m, &w[0]))
            .collect::<Result<Vec<usize>>>()?;
        *acc.entry(assign).or_insert_with(Rational::zero) += &w[1] - &w[0];
    }
    Ok(acc.into_iter().collect())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightedMapDoc {
    pub map: BTreeMap<String, String>,
    pub weight: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerdictDoc {
    pub feasible: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub witness: Vec<WeightedMapDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<BTreeMap<String, BTreeMap<String, String>>>,
    pub map_count: usize,
}

impl FeasibilityVerdict {
    pub fn to_doc(&self, sys: &MonotoneSystem) -> VerdictDoc {
        let (a, s) = (&sys.a, &sys.s);
        VerdictDoc {
            feasible: self.feasible,
            witness: self
                .witness
                .iter()
                .map(|(m, w)| WeightedMapDoc {
                    map: m
                        .iter()
                        .enumerate()
                        .map(|(g, &x)| (a.label(g).to_string(), s.label(x).to_string()))
                        .collect(),
                    weight: rational::format(w),
                })
                .collect(),
            certificate: self.certificate.as_ref().map(|y| {
                a.elements()
                    .map(|g| {
                        let row = s
                            .elements()
                            .filter(|&x| !y[g * s.len() + x].is_zero())
                            .map(|x| {
                                (
                                    s.label(x).to_string(),
                                    rational::format(&y[g * s.len() + x]),
                                )
                            })
                            .collect();
                        (a.label(g).to_string(), row)
                    })
                    .collect()
            }),
            map_count: self.map_count,
        }
    }

    pub fn from_doc(sys: &MonotoneSystem, doc: &VerdictDoc) -> Result<FeasibilityVerdict> {
        let (a, s) = (&sys.a, &sys.s);
        let mut witness = Vec::new();
        for w in &doc.witness {
            let mut m = vec![usize::MAX; a.len()];
            for (g, x) in &w.map {
                m[a.index_of(g)?] = s.index_of(x)?;
            }
            if m.contains(&usize::MAX) {
                return Err(Error::Parse("witness map is not total".into()));
            }
            witness.push((m, rational::parse(&w.weight)?));
        }
        let certificate = match &doc.certificate {
            None => None,
            Some(rows) => {
                let mut y = vec![Rational::zero(); a.len() * s.len()];
                for (g, row) in rows {
                    let gi = a.index_of(g)?;
                    for (x, v) in row {
                        y[gi * s.len() + s.index_of(x)?] = rational::parse(v)?;
                    }
                }
                Some(y)
            }
        };
        Ok(FeasibilityVerdict {
            feasible: doc.feasible,
            witness,
            certificate,
            map_count: doc.map_count,
        })
    }
}
