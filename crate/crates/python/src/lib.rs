//! Python bindings. Structured results cross the boundary as JSON strings
//! so that rationals keep their exact `"p/q"` form.

use std::collections::BTreeMap;

use monoeq::classw::classify;
use monoeq::corpus::{figures, Corpus};
use monoeq::counterexample::{self as cx, DEFAULT_FENCE_CAP};
use monoeq::error::Error;
use monoeq::measures::Measure;
use monoeq::oracle::{self, FeasibilityVerdict, VerdictDoc, DEFAULT_MAP_CAP};
use monoeq::poset::{self, PosetDoc, DEFAULT_UPSET_CAP};
use monoeq::realize::{maps_from_doc, realize, verify_realization, RealizationDoc};
use monoeq::sync::{is_synchronizable, Direction};
use monoeq::system::MonotoneSystem;
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;

create_exception!(monoeq_py, MonoeqError, PyException, "Refusal raised by the library; args are (reason, message).");

fn to_py(e: Error) -> PyErr {
    MonoeqError::new_err((e.code(), e.to_string()))
}

fn direction(name: &str) -> PyResult<Direction> {
    match name {
        "minimal" => Ok(Direction::Minimal),
        "maximal" => Ok(Direction::Maximal),
        _ => Err(PyValueError::new_err(format!("direction must be `minimal` or `maximal`, got `{name}`"))),
    }
}

/// A finite poset given by its elements and cover relations.
#[pyclass(module = "monoeq_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct Poset {
    inner: poset::Poset,
}

#[pymethods]
impl Poset {
    #[new]
    fn new(elements: Vec<String>, covers: Vec<(String, String)>) -> PyResult<Self> {
        let inner = poset::Poset::from_doc(&PosetDoc { elements, covers }).map_err(to_py)?;
        Ok(Poset { inner })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Poset {
            inner: poset::parse_poset(text).map_err(to_py)?,
        })
    }

    /// Named example: `y`, `w-upper`, `w-lower`, `sync`, `crown6`,
    /// `standard` or `legged-<n>`.
    #[staticmethod]
    fn figure(name: &str) -> PyResult<Self> {
        Ok(Poset {
            inner: figures::by_name(name).map_err(to_py)?,
        })
    }

    #[getter]
    fn elements(&self) -> Vec<String> {
        self.inner.labels().to_vec()
    }

    #[getter]
    fn covers(&self) -> Vec<(String, String)> {
        self.inner.to_doc().covers
    }

    fn leq(&self, x: &str, y: &str) -> PyResult<bool> {
        let (x, y) = (
            self.inner.index_of(x).map_err(to_py)?,
            self.inner.index_of(y).map_err(to_py)?,
        );
        Ok(self.inner.leq(x, y))
    }

    fn dual(&self) -> Poset {
        Poset {
            inner: self.inner.dual(),
        }
    }

    /// Class tag, e.g. `"WStarLower"` or `"NotClassW"`.
    fn classify(&self) -> String {
        format!("{:?}", classify(&self.inner).class)
    }

    #[pyo3(signature = (direction="minimal"))]
    fn is_synchronizable(&self, direction: &str) -> PyResult<bool> {
        Ok(is_synchronizable(&self.inner, self::direction(direction)?).synchronizable)
    }

    /// Full synchronizability report as JSON.
    #[pyo3(signature = (direction="minimal"))]
    fn sync_report(&self, direction: &str) -> PyResult<String> {
        let r = is_synchronizable(&self.inner, self::direction(direction)?);
        Ok(r.to_json(&self.inner).to_string())
    }

    fn to_json(&self) -> String {
        poset::poset_to_json(&self.inner)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Poset({} elements, {} covers)", self.inner.len(), self.inner.covers().len())
    }
}

/// Probability measures on a target poset indexed by an index poset.
#[pyclass(module = "monoeq_py", frozen)]
struct System {
    inner: MonotoneSystem,
}

#[pymethods]
impl System {
    /// `measures` maps each index element to `{target element: "p/q"}`.
    #[new]
    fn new(index: &Poset, target: &Poset, measures: BTreeMap<String, BTreeMap<String, String>>) -> PyResult<Self> {
        let (a, s) = (index.inner.clone(), target.inner.clone());
        let mut ms = Vec::with_capacity(a.len());
        for g in a.labels() {
            let row = measures
                .get(g)
                .ok_or_else(|| to_py(Error::Parse(format!("no measure for `{g}`"))))?;
            let pairs = row
                .iter()
                .map(|(x, p)| Ok((x.as_str(), monoeq::rational::parse(p)?)))
                .collect::<Result<Vec<_>, Error>>()
                .map_err(to_py)?;
            ms.push(Measure::from_labels(&s, &pairs).map_err(to_py)?);
        }
        Ok(System {
            inner: MonotoneSystem::new(a, s, ms).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(System {
            inner: MonotoneSystem::parse(text).map_err(to_py)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    #[getter]
    fn index(&self) -> Poset {
        Poset {
            inner: self.inner.a.clone(),
        }
    }

    #[getter]
    fn target(&self) -> Poset {
        Poset {
            inner: self.inner.s.clone(),
        }
    }

    #[pyo3(signature = (cap_upsets=DEFAULT_UPSET_CAP))]
    fn is_monotone(&self, cap_upsets: usize) -> PyResult<bool> {
        Ok(self.inner.monotonicity_violation(cap_upsets).map_err(to_py)?.is_none())
    }

    /// Realization document as JSON: `{"case": ..., "maps": {α: [[lo, hi, x], ...]}}`.
    fn realize(&self) -> PyResult<String> {
        self.inner.check_monotone(DEFAULT_UPSET_CAP).map_err(to_py)?;
        let r = realize(&self.inner).map_err(to_py)?;
        Ok(serde_json::to_string(&r.to_doc(&self.inner)).expect("serializable"))
    }

    /// Checks a realization or LP verdict document against this system.
    #[pyo3(signature = (document, cap_maps=DEFAULT_MAP_CAP))]
    fn verify(&self, document: &str, cap_maps: usize) -> PyResult<bool> {
        let v: serde_json::Value = serde_json::from_str(document).map_err(|e| to_py(e.into()))?;
        if v.get("maps").is_some() {
            let doc: RealizationDoc = serde_json::from_value(v).map_err(|e| to_py(e.into()))?;
            let maps = maps_from_doc(&self.inner, &doc).map_err(to_py)?;
            return Ok(verify_realization(&self.inner, &maps).pass);
        }
        let doc: VerdictDoc = serde_json::from_value(v).map_err(|e| to_py(e.into()))?;
        let verdict = FeasibilityVerdict::from_doc(&self.inner, &doc).map_err(to_py)?;
        oracle::check_verdict(&self.inner, &verdict, cap_maps).map_err(to_py)
    }

    /// LP verdict document as JSON.
    #[pyo3(signature = (cap_maps=DEFAULT_MAP_CAP))]
    fn oracle(&self, cap_maps: usize) -> PyResult<String> {
        let v = oracle::realizably_monotone(&self.inner, cap_maps).map_err(to_py)?;
        Ok(serde_json::to_string(&v.to_doc(&self.inner)).expect("serializable"))
    }

    fn __repr__(&self) -> String {
        format!("System(|A|={}, |S|={})", self.inner.a.len(), self.inner.s.len())
    }
}

/// Certified counterexample bundle for a non-synchronizable index poset.
#[pyfunction]
#[pyo3(signature = (poset, cap_fences=DEFAULT_FENCE_CAP, cap_upsets=DEFAULT_UPSET_CAP, cap_maps=DEFAULT_MAP_CAP))]
fn counterexample(poset: &Poset, cap_fences: usize, cap_upsets: usize, cap_maps: usize) -> PyResult<String> {
    let (b, cert) =
        cx::counterexample(&poset.inner, cap_fences, cap_upsets, cap_maps).map_err(to_py)?;
    Ok(b.to_json(Some(&cert)).to_string())
}

/// Seeded random systems that meet one of the sufficient conditions.
#[pyfunction]
#[pyo3(signature = (seed, count, max_index=6, max_target=6, max_den=12))]
fn random_systems(seed: u64, count: usize, max_index: usize, max_target: usize, max_den: usize) -> PyResult<Vec<System>> {
    let mut c = Corpus::new(seed);
    (0..count)
        .map(|_| {
            let (inner, _) = c
                .realizable_instance(max_index, max_target, max_den, DEFAULT_MAP_CAP)
                .map_err(to_py)?;
            Ok(System { inner })
        })
        .collect()
}

#[pymodule]
fn monoeq_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Poset>()?;
    m.add_class::<System>()?;
    m.add_function(wrap_pyfunction!(counterexample, m)?)?;
    m.add_function(wrap_pyfunction!(random_systems, m)?)?;
    m.add("MonoeqError", m.py().get_type::<MonoeqError>())?;
    Ok(())
}
