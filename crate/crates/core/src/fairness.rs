//! Demographic group assignments, the linear constraint matrix, and balance
//! metrics.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::Clustering;

/// Assignment of each vertex to one of `h` demographic groups, labels 0-based.
///
/// Every group must be non-empty; this keeps the constraint matrix at full
/// column rank h - 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupAssignment {
    h: usize,
    labels: Vec<usize>,
}

impl GroupAssignment {
    pub fn new(h: usize, labels: Vec<usize>) -> Result<Self> {
        if h < 1 {
            return Err(Error::InvalidGroups("h must be at least 1".into()));
        }
        if labels.is_empty() {
            return Err(Error::InvalidGroups("empty label vector".into()));
        }
        let mut sizes = vec![0usize; h];
        for &l in &labels {
            if l >= h {
                return Err(Error::InvalidGroups(format!(
                    "group label {l} out of range for h = {h}"
                )));
            }
            sizes[l] += 1;
        }
        if let Some(s) = sizes.iter().position(|&c| c == 0) {
            return Err(Error::InvalidGroups(format!("group {s} is empty")));
        }
        Ok(Self { h, labels })
    }

    /// Everyone in one group; the degenerate case the fair algorithms fall
    /// back from.
    pub fn single_group(n: usize) -> Self {
        Self {
            h: 1,
            labels: vec![0; n],
        }
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.h];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

/// The n x (h-1) constraint matrix whose column s is the centered membership
/// indicator of group s: f^(s) - (|V_s|/n) * 1.
///
/// The last group is the dropped column; since the indicators sum to the
/// all-ones vector, any single dropped group spans the same constraint space.
pub fn fairness_matrix(groups: &GroupAssignment) -> Result<Array2<f64>> {
    let h = groups.h();
    if h < 2 {
        return Err(Error::SingleGroup);
    }
    let n = groups.n();
    let sizes = groups.group_sizes();
    let mut f = Array2::zeros((n, h - 1));
    for (i, &g) in groups.labels().iter().enumerate() {
        for s in 0..(h - 1) {
            let indicator = if g == s { 1.0 } else { 0.0 };
            f[[i, s]] = indicator - sizes[s] as f64 / n as f64;
        }
    }
    Ok(f)
}

/// Per-cluster balance values plus their mean.
#[derive(Debug, Clone)]
pub struct BalanceProfile {
    pub per_cluster: Vec<f64>,
    pub average: f64,
}

/// Balance of each cluster: the minimum over ordered group pairs s != s' of
/// |V_s ∩ C_l| / |V_s' ∩ C_l|, in [0, 1].
///
/// A cluster missing some group has balance 0. With a single group the
/// minimum ranges over no pairs and every cluster is trivially balanced (1).
pub fn balance_profile(c: &Clustering, groups: &GroupAssignment) -> Result<BalanceProfile> {
    if c.n() != groups.n() {
        return Err(Error::LengthMismatch {
            left: c.n(),
            right: groups.n(),
        });
    }
    let k = c.k();
    let h = groups.h();
    let mut counts = vec![vec![0usize; h]; k];
    for (i, &l) in c.labels().iter().enumerate() {
        counts[l][groups.labels()[i]] += 1;
    }
    let mut per_cluster = Vec::with_capacity(k);
    for (l, cluster_counts) in counts.iter().enumerate() {
        let total: usize = cluster_counts.iter().sum();
        if total == 0 {
            return Err(Error::EmptyCluster(l));
        }
        let balance = if h == 1 {
            1.0
        } else if cluster_counts.iter().any(|&c| c == 0) {
            0.0
        } else {
            let max = *cluster_counts.iter().max().unwrap() as f64;
            let min = *cluster_counts.iter().min().unwrap() as f64;
            min / max
        };
        per_cluster.push(balance);
    }
    let average = per_cluster.iter().sum::<f64>() / k as f64;
    Ok(BalanceProfile {
        per_cluster,
        average,
    })
}

/// True iff every cluster contains every group in the same fraction as the
/// whole vertex set, up to `tol`.
pub fn is_proportional(c: &Clustering, groups: &GroupAssignment, tol: f64) -> Result<bool> {
    if c.n() != groups.n() {
        return Err(Error::LengthMismatch {
            left: c.n(),
            right: groups.n(),
        });
    }
    let n = c.n() as f64;
    let k = c.k();
    let h = groups.h();
    let mut counts = vec![vec![0usize; h]; k];
    for (i, &l) in c.labels().iter().enumerate() {
        counts[l][groups.labels()[i]] += 1;
    }
    let group_sizes = groups.group_sizes();
    for (l, cluster_counts) in counts.iter().enumerate() {
        let total: usize = cluster_counts.iter().sum();
        if total == 0 {
            return Err(Error::EmptyCluster(l));
        }
        for s in 0..h {
            let in_cluster = cluster_counts[s] as f64 / total as f64;
            let overall = group_sizes[s] as f64 / n;
            if (in_cluster - overall).abs() > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Default tolerance for [`is_proportional`] at exact-arithmetic scales.
pub const PROPORTIONALITY_TOL: f64 = 1e-9;
