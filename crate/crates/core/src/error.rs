use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: vertex id {id} out of range for n = {n}")]
    IndexOutOfRange { line: usize, id: usize, n: usize },

    #[error("line {line}: duplicate undirected edge ({i}, {j})")]
    DuplicateEdge { line: usize, i: usize, j: usize },

    #[error("line {line}: negative edge weight {weight}")]
    NegativeWeight { line: usize, weight: f64 },

    #[error("line {line}: self-loop at vertex {vertex}")]
    SelfLoop { line: usize, vertex: usize },

    #[error("cluster {0} is empty")]
    EmptyCluster(usize),

    #[error("cluster {0} has zero volume")]
    ZeroVolume(usize),

    #[error("invalid group assignment: {0}")]
    InvalidGroups(String),

    #[error("only one group present; the fairness constraint matrix is empty")]
    SingleGroup,

    #[error("matrix is not symmetric (max asymmetry {max_asymmetry:.3e})")]
    NotSymmetric { max_asymmetry: f64 },

    #[error("eigensolver failed to converge (LAPACK info = {info})")]
    ConvergenceFailure { info: i32 },

    #[error("matrix is not positive definite (smallest eigenvalue {min_eigenvalue:.3e})")]
    NotPositiveDefinite { min_eigenvalue: f64 },

    #[error("invalid cluster count k = {k}; must be between 1 and {max}")]
    InvalidK { k: usize, max: usize },

    #[error("vertex {0} is isolated (zero degree)")]
    IsolatedVertex(usize),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("configuration is not balanced (requires equal cluster sizes and group fractions 1/h)")]
    Unbalanced,

    #[error("k = {k} does not divide n = {n}")]
    Indivisible { n: usize, k: usize },

    #[error("perturbation is defined for exactly two groups, got h = {0}")]
    UnsupportedGroupCount(usize),

    #[error("label vectors have different lengths ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },

    #[error("cluster counts differ (predicted k = {pred}, reference k = {truth})")]
    KMismatch { pred: usize, truth: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
