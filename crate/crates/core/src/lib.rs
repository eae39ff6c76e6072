//! Spectral graph clustering with proportionality constraints.
//!
//! The crate provides:
//!
//! - standard spectral clustering (unnormalized and normalized) and variants
//!   constrained so that every cluster represents each demographic group in
//!   the same proportion as the whole vertex set ([`spectral`]);
//! - balance and proportionality metrics plus permutation-invariant
//!   misclassification error ([`fairness`], [`metrics`]);
//! - a stochastic block model whose planted clustering is proportional while
//!   a competing group split is not, with closed-form spectral oracles for
//!   balanced configurations ([`sbm`]);
//! - the dense numeric kernels the algorithms need ([`linalg`]) and seeded
//!   k-means++ with Lloyd refinement ([`kmeans`]).
//!
//! Everything randomized takes an explicit seeded RNG and is reproducible
//! bit-for-bit, with or without the `parallel` feature (on by default; work
//! such as k-means replicates then runs on rayon).

pub mod error;
pub mod fairness;
pub mod graph;
pub mod kmeans;
pub mod linalg;
pub mod metrics;
pub mod sbm;
pub mod spectral;

pub use error::{Error, Result};
pub use fairness::{balance_profile, fairness_matrix, is_proportional, GroupAssignment};
pub use graph::{ncut, parse_edge_list, ratio_cut, Clustering, Graph};
pub use metrics::{misclassification_error, report, ClusteringReport};
pub use sbm::{
    counterexample_graph, perturb_groups, sample_fair_sbm, theoretical_spectrum, FairSbmConfig,
};
pub use spectral::{
    fair_sc_normalized, fair_sc_unnormalized, sc_normalized, sc_unnormalized, Embedding,
};
