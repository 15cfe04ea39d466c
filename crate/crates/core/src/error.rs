use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("no groups supplied")]
    NoGroups,
    #[error("group {group} has {found} components, expected {expected}")]
    MismatchedDimension {
        group: usize,
        expected: usize,
        found: usize,
    },
    #[error("observations must have at least one component")]
    ZeroDimension,
    #[error("group {0} has no subjects")]
    EmptyGroup(usize),
    #[error("non-finite value in group {group}, subject {subject}, component {component}")]
    NonFiniteValue {
        group: usize,
        subject: usize,
        component: usize,
    },
    #[error("index {index} out of range 1..={bound}")]
    OutOfRange { index: usize, bound: usize },
    #[error("empty sample")]
    EmptySample,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("layout has {cells} cells but the dataset has {groups} groups")]
    LayoutMismatch { cells: usize, groups: usize },
    #[error("invalid factorial layout: {0}")]
    InvalidLayout(String),
    #[error("significance level {0} is not in (0, 1)")]
    InvalidAlpha(f64),
    #[error("bootstrap replicate count must be at least 1")]
    InvalidReplicates,
    #[error("rho requires two distinct components, got j = j' = {0}")]
    SameComponent(usize),
    #[error("group {group} has {size} subjects, at least 2 are required")]
    DegenerateGroup { group: usize, size: usize },
    #[error("correlation {rho} is not admissible for dimension {dim}")]
    InvalidCorrelation { rho: f64, dim: usize },
    #[error("matrix is not positive semi-definite (smallest eigenvalue {0})")]
    NotPsd(f64),
    #[error("family of {size} hypotheses needs {intersections} intersection tests, cap is {cap}")]
    FamilyTooLarge {
        size: usize,
        intersections: usize,
        cap: usize,
    },
    #[error("hypothesis family is empty")]
    EmptyFamily,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, Error>;
