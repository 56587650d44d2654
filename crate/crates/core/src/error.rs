use thiserror::Error;

/// Errors raised by the library.
///
/// Every variant maps onto one of the CLI exit classes through
/// [`Error::exit_code`]: input problems (2), capped enumerations (3) and
/// property failures that are valid answers rather than bugs (1).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("malformed document: {0}")]
    Parse(String),
    #[error("empty element label")]
    EmptyLabel,
    #[error("duplicate element `{0}`")]
    DuplicateElement(String),
    #[error("unknown element `{0}`")]
    UnknownElement(String),
    #[error("element index {0} is not part of the poset")]
    ForeignElement(usize),
    #[error("order relation has a cycle through `{0}` and `{1}`")]
    Cycle(String, String),
    #[error("Hasse diagram is disconnected")]
    Disconnected,
    #[error("empty subset")]
    EmptySubset,
    #[error("{what} enumeration exceeded cap of {cap}")]
    CapExceeded { what: &'static str, cap: usize },

    #[error("Hasse diagram is not a tree")]
    NotTree,
    #[error("`{0}` is not a leaf of the Hasse tree")]
    NotLeaf(String),
    #[error("poset is not in Class W (bad section or tail at `{0}`)")]
    NotClassW(String),

    #[error("measure totals differ ({0} vs {1})")]
    TotalMismatch(String, String),
    #[error("measure has {got} entries, poset has {expected} elements")]
    SizeMismatch { expected: usize, got: usize },
    #[error("negative mass at `{0}`")]
    NegativeMass(String),
    #[error("not a distribution function on K: node {node} has mass below its children")]
    NotKDist { node: String },
    #[error("K-distribution is not interlaced with the distribution function at node {0}")]
    NotInterlaced(String),
    #[error("K-distributions are not mutually interlaced at node {0}")]
    NotMutuallyInterlaced(String),
    #[error("the root index has no parent tail to extend to")]
    RootIndex,
    #[error("point {0} outside the map domain")]
    OutOfDomain(String),
    #[error("domain mismatch in composition")]
    DomainMismatch,

    #[error("graph is disconnected")]
    DisconnectedGraph,
    #[error("target tree is not of minimum weight ({got} > {min})")]
    NotMinimumWeight { got: usize, min: usize },
    #[error("no path between `{0}` and `{1}`")]
    NoPath(String, String),
    #[error("product graph is disconnected")]
    DisconnectedProduct,

    #[error("not stochastically monotone: P[{lower}] is not below P[{upper}]")]
    NotStochasticallyMonotone { lower: String, upper: String },
    #[error("no sufficient condition applies to this system")]
    NoCaseApplies,
    #[error("index poset is not synchronizable ({0})")]
    NotSynchronizable(String),
    #[error("index poset is synchronizable; no counterexample exists")]
    Synchronizable,
    #[error("negative coefficient for `{0}`")]
    NegativeCoefficient(String),
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

impl Error {
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::CapExceeded { .. } => 3,
            Error::NotClassW(_)
            | Error::NotTree
            | Error::NotStochasticallyMonotone { .. }
            | Error::NoCaseApplies
            | Error::NotSynchronizable(_)
            | Error::Synchronizable => 1,
            _ => 2,
        }
    }

    /// Stable machine-readable reason code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Parse(_) => "parse",
            Error::EmptyLabel => "empty_label",
            Error::DuplicateElement(_) => "duplicate_element",
            Error::UnknownElement(_) => "unknown_element",
            Error::ForeignElement(_) => "foreign_element",
            Error::Cycle(..) => "cycle",
            Error::Disconnected => "disconnected_hasse",
            Error::EmptySubset => "empty_subset",
            Error::CapExceeded { .. } => "cap_exceeded",
            Error::NotTree => "not_tree",
            Error::NotLeaf(_) => "not_leaf",
            Error::NotClassW(_) => "not_class_w",
            Error::TotalMismatch(..) => "total_mismatch",
            Error::SizeMismatch { .. } => "size_mismatch",
            Error::NegativeMass(_) => "negative_mass",
            Error::NotKDist { .. } => "not_kdist",
            Error::NotInterlaced(_) => "not_interlaced",
            Error::NotMutuallyInterlaced(_) => "not_mutually_interlaced",
            Error::RootIndex => "root_index",
            Error::OutOfDomain(_) => "out_of_domain",
            Error::DomainMismatch => "domain_mismatch",
            Error::DisconnectedGraph => "disconnected_graph",
            Error::NotMinimumWeight { .. } => "not_minimum_weight",
            Error::NoPath(..) => "no_path",
            Error::DisconnectedProduct => "disconnected_product",
            Error::NotStochasticallyMonotone { .. } => "not_stochastically_monotone",
            Error::NoCaseApplies => "no_case_applies",
            Error::NotSynchronizable(_) => "not_synchronizable",
            Error::Synchronizable => "synchronizable",
            Error::NegativeCoefficient(_) => "negative_coefficient",
            Error::Internal(_) => "internal",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
