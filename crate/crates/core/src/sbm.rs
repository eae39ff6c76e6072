//! A stochastic block model with orthogonal cluster and group structure:
//! connection probabilities depend on whether two vertices share a cluster
//! and whether they share a group (a > b > c > d). The planted clustering is
//! proportional across groups; the group split is not.
//!
//! For balanced configurations the expected adjacency matrix has a closed-form
//! spectrum, which this module exposes as a numerical test oracle.

use ndarray::{Array2, Axis};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fairness::GroupAssignment;
use crate::graph::{Clustering, Graph};

/// Model configuration: cluster sizes, per-group fractions (identical in
/// every cluster), and the four connection probabilities.
#[derive(Debug, Clone)]
pub struct FairSbmConfig {
    cluster_sizes: Vec<usize>,
    group_fractions: Vec<f64>,
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl FairSbmConfig {
    /// Validates all invariants, including the strict ordering a > b > c > d.
    pub fn new(
        cluster_sizes: Vec<usize>,
        group_fractions: Vec<f64>,
        a: f64,
        b: f64,
        c: f64,
        d: f64,
    ) -> Result<Self> {
        let cfg = Self::new_unchecked(cluster_sizes, group_fractions, a, b, c, d)?;
        if !(a > b && b > c && c > d && d >= 0.0) {
            return Err(Error::Config(format!(
                "probabilities must satisfy a > b > c > d >= 0, got a={a}, b={b}, c={c}, d={d}"
            )));
        }
        Ok(cfg)
    }

    /// Like [`FairSbmConfig::new`] but without the probability-ordering
    /// invariant, for degenerate test configurations (e.g. all-equal
    /// probabilities). Structural invariants are still enforced.
    pub fn new_unchecked(
        cluster_sizes: Vec<usize>,
        group_fractions: Vec<f64>,
        a: f64,
        b: f64,
        c: f64,
        d: f64,
    ) -> Result<Self> {
        if cluster_sizes.is_empty() || cluster_sizes.iter().any(|&s| s == 0) {
            return Err(Error::Config(
                "cluster sizes must be non-empty and positive".into(),
            ));
        }
        if group_fractions.is_empty() || group_fractions.iter().any(|&f| f <= 0.0) {
            return Err(Error::Config(
                "group fractions must be non-empty and positive".into(),
            ));
        }
        let total: f64 = group_fractions.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "group fractions must sum to 1, got {total}"
            )));
        }
        for &size in &cluster_sizes {
            let mut assigned = 0usize;
            for &frac in &group_fractions {
                let exact = frac * size as f64;
                let rounded = exact.round();
                if (exact - rounded).abs() > 1e-6 {
                    return Err(Error::Config(format!(
                        "group fraction {frac} times cluster size {size} is not integral"
                    )));
                }
                assigned += rounded as usize;
            }
            if assigned != size {
                return Err(Error::Config(format!(
                    "rounded group counts do not fill cluster of size {size}"
                )));
            }
        }
        for (name, p) in [("a", a), ("b", b), ("c", c), ("d", d)] {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Config(format!(
                    "probability {name} = {p} outside [0, 1]"
                )));
            }
        }
        Ok(Self {
            cluster_sizes,
            group_fractions,
            a,
            b,
            c,
            d,
        })
    }

    /// Fully balanced configuration: k equal clusters, h equal groups.
    /// Requires k*h to divide n.
    pub fn balanced(n: usize, k: usize, h: usize, a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        if k == 0 || h == 0 || n == 0 || n % (k * h) != 0 {
            return Err(Error::Config(format!(
                "balanced configuration requires k*h to divide n (n={n}, k={k}, h={h})"
            )));
        }
        Self::new(
            vec![n / k; k],
            vec![1.0 / h as f64; h],
            a,
            b,
            c,
            d,
        )
    }

    pub fn n(&self) -> usize {
        self.cluster_sizes.iter().sum()
    }

    pub fn k(&self) -> usize {
        self.cluster_sizes.len()
    }

    pub fn h(&self) -> usize {
        self.group_fractions.len()
    }

    pub fn cluster_sizes(&self) -> &[usize] {
        &self.cluster_sizes
    }

    pub fn group_fractions(&self) -> &[f64] {
        &self.group_fractions
    }

    pub fn probabilities(&self) -> (f64, f64, f64, f64) {
        (self.a, self.b, self.c, self.d)
    }

    /// Number of vertices of group `s` inside cluster `l`.
    pub fn cell_count(&self, l: usize, s: usize) -> usize {
        (self.group_fractions[s] * self.cluster_sizes[l] as f64).round() as usize
    }

    /// The hypothesis of the recovery analysis: equal cluster sizes and all
    /// group fractions exactly 1/h.
    pub fn is_balanced(&self) -> bool {
        let first = self.cluster_sizes[0];
        if self.cluster_sizes.iter().any(|&s| s != first) {
            return false;
        }
        let h = self.h();
        self.group_fractions
            .iter()
            .all(|&f| (f - 1.0 / h as f64).abs() <= 1e-12)
            && first % h == 0
    }

    /// Cluster and group labels in the canonical layout: clusters outermost,
    /// groups innermost.
    pub fn canonical_labels(&self) -> (Vec<usize>, Vec<usize>) {
        let n = self.n();
        let mut clusters = Vec::with_capacity(n);
        let mut groups = Vec::with_capacity(n);
        for (l, _) in self.cluster_sizes.iter().enumerate() {
            for s in 0..self.h() {
                let count = self.cell_count(l, s);
                clusters.extend(std::iter::repeat(l).take(count));
                groups.extend(std::iter::repeat(s).take(count));
            }
        }
        (clusters, groups)
    }

    fn pair_probability(&self, same_cluster: bool, same_group: bool) -> f64 {
        match (same_cluster, same_group) {
            (true, true) => self.a,
            (false, true) => self.b,
            (true, false) => self.c,
            (false, false) => self.d,
        }
    }
}

// splitmix64; derives one independent stream seed per row
fn mix_seed(master: u64, i: u64) -> u64 {
    let mut z = master ^ i.wrapping_mul(0x9e3779b97f4a7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

fn fill_row(
    i: usize,
    row: &mut ndarray::ArrayViewMut1<f64>,
    n: usize,
    master: u64,
    prob: &(impl Fn(usize, usize) -> f64 + Sync),
) {
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(master, i as u64));
    for j in (i + 1)..n {
        if rng.gen::<f64>() < prob(i, j) {
            row[j] = 1.0;
        }
    }
}

/// Samples the upper triangle row by row (one seeded stream per row, so the
/// parallel and sequential paths produce the same graph), then mirrors.
fn sample_pair_matrix(
    n: usize,
    master: u64,
    prob: impl Fn(usize, usize) -> f64 + Sync,
) -> Array2<f64> {
    let mut w = Array2::zeros((n, n));
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        w.axis_iter_mut(Axis(0))
            .into_par_iter()
            .enumerate()
            .for_each(|(i, mut row)| fill_row(i, &mut row, n, master, &prob));
    }
    #[cfg(not(feature = "parallel"))]
    {
        for (i, mut row) in w.axis_iter_mut(Axis(0)).enumerate() {
            fill_row(i, &mut row, n, master, &prob);
        }
    }
    for i in 0..n {
        for j in 0..i {
            w[[i, j]] = w[[j, i]];
        }
    }
    w
}

/// Draws a graph from the model along with its planted clustering and group
/// assignment. Vertices are laid out canonically and then shuffled by a
/// uniformly random permutation; all edges carry weight 1.
pub fn sample_fair_sbm(
    cfg: &FairSbmConfig,
    rng: &mut impl Rng,
) -> Result<(Graph, Clustering, GroupAssignment)> {
    let n = cfg.n();
    let (can_clusters, can_groups) = cfg.canonical_labels();

    let mut positions: Vec<usize> = (0..n).collect();
    positions.shuffle(rng);
    let mut clusters = vec![0usize; n];
    let mut groups = vec![0usize; n];
    for (canonical, &vertex) in positions.iter().enumerate() {
        clusters[vertex] = can_clusters[canonical];
        groups[vertex] = can_groups[canonical];
    }

    let master = rng.gen::<u64>();
    let weights = sample_pair_matrix(n, master, |i, j| {
        cfg.pair_probability(clusters[i] == clusters[j], groups[i] == groups[j])
    });

    let graph = Graph::from_weights(weights)?;
    let truth = Clustering::new(cfg.k(), clusters)?;
    let assignment = GroupAssignment::new(cfg.h(), groups)?;
    Ok((graph, truth, assignment))
}

/// Expected adjacency matrix in the canonical vertex order: entry (i, j) is
/// the pair's connection probability, diagonal zero. Defined for balanced
/// configurations only, matching the spectral oracle.
pub fn expected_adjacency(cfg: &FairSbmConfig) -> Result<Array2<f64>> {
    if !cfg.is_balanced() {
        return Err(Error::Unbalanced);
    }
    let n = cfg.n();
    let (clusters, groups) = cfg.canonical_labels();
    let mut w = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                w[[i, j]] =
                    cfg.pair_probability(clusters[i] == clusters[j], groups[i] == groups[j]);
            }
        }
    }
    Ok(w)
}

/// Expected Laplacian (lambda_1 - a) I - W_expected: every vertex has the
/// same expected degree lambda_1 - a in the balanced model.
pub fn expected_laplacian(cfg: &FairSbmConfig) -> Result<Array2<f64>> {
    let w = expected_adjacency(cfg)?;
    let n = cfg.n();
    let expected_degree = lambda1(cfg) - cfg.a;
    let mut lap = -w;
    for i in 0..n {
        lap[[i, i]] += expected_degree;
    }
    Ok(lap)
}

fn lambda1(cfg: &FairSbmConfig) -> f64 {
    let (a, b, c, d) = cfg.probabilities();
    let k = cfg.k() as f64;
    let h = cfg.h() as f64;
    let scale = cfg.n() as f64 / (k * h);
    scale * ((a + (h - 1.0) * c) + (k - 1.0) * (b + (h - 1.0) * d))
}

/// Closed-form spectrum of the expected matrices of a balanced configuration.
///
/// `lambda1 > lambda_group > 0`, `lambda1 > lambda_cluster > 0`, and both
/// dominate `|lambda_cross|`; `lambda_cross` vanishes exactly when
/// a - c = b - d.
#[derive(Debug, Clone)]
pub struct SpectrumOracle {
    n: usize,
    k: usize,
    h: usize,
    /// Top eigenvalue; also fixes the expected degree lambda_1 - a.
    pub lambda1: f64,
    /// Eigenvalue of the group-indicator directions, multiplicity h - 1.
    pub lambda_group: f64,
    /// Eigenvalue of the cluster-indicator directions, multiplicity k - 1.
    pub lambda_cluster: f64,
    /// Eigenvalue of the mixed directions, multiplicity (k - 1)(h - 1).
    pub lambda_cross: f64,
}

impl SpectrumOracle {
    /// Eigenvalues of the shifted expected adjacency (expected adjacency plus
    /// a on the diagonal), ascending, with multiplicities.
    pub fn adjacency_spectrum(&self) -> Vec<f64> {
        let mut values = Vec::with_capacity(self.n);
        values.push(self.lambda1);
        values.extend(std::iter::repeat(self.lambda_group).take(self.h - 1));
        values.extend(std::iter::repeat(self.lambda_cluster).take(self.k - 1));
        values.extend(std::iter::repeat(self.lambda_cross).take((self.k - 1) * (self.h - 1)));
        values.extend(std::iter::repeat(0.0).take(self.n - self.h * self.k));
        values.sort_by(|x, y| x.partial_cmp(y).unwrap());
        values
    }

    /// Eigenvalues of Z^T L_expected Z for any orthonormal nullspace basis Z
    /// of the constraint matrix transpose, ascending; length n - h + 1.
    /// The k smallest are 0 and lambda1 - lambda_cluster (k - 1 times).
    pub fn constrained_spectrum(&self) -> Vec<f64> {
        let mut values = Vec::with_capacity(self.n - self.h + 1);
        values.push(0.0);
        values.extend(std::iter::repeat(self.lambda1 - self.lambda_cluster).take(self.k - 1));
        values.extend(
            std::iter::repeat(self.lambda1 - self.lambda_cross)
                .take((self.k - 1) * (self.h - 1)),
        );
        values.extend(std::iter::repeat(self.lambda1).take(self.n - self.h * self.k));
        values.sort_by(|x, y| x.partial_cmp(y).unwrap());
        values
    }
}

/// The closed-form eigenvalues of the expected matrices for a balanced
/// configuration with strictly ordered probabilities.
pub fn theoretical_spectrum(cfg: &FairSbmConfig) -> Result<SpectrumOracle> {
    if !cfg.is_balanced() {
        return Err(Error::Unbalanced);
    }
    let (a, b, c, d) = cfg.probabilities();
    if !(a > b && b > c && c > d && d >= 0.0) {
        return Err(Error::Config(
            "spectrum oracle requires a > b > c > d >= 0".into(),
        ));
    }
    let k = cfg.k() as f64;
    let h = cfg.h() as f64;
    let scale = cfg.n() as f64 / (k * h);
    let oracle = SpectrumOracle {
        n: cfg.n(),
        k: cfg.k(),
        h: cfg.h(),
        lambda1: lambda1(cfg),
        lambda_group: scale * ((a - c) + (k - 1.0) * (b - d)),
        lambda_cluster: scale * ((a + (h - 1.0) * c) - (b + (h - 1.0) * d)),
        lambda_cross: scale * ((a - c) - (b - d)),
    };
    // the ordering claims concern eigenvalue classes with positive
    // multiplicity, i.e. h >= 2 resp. k >= 2
    if cfg.h() >= 2 {
        debug_assert!(oracle.lambda1 > oracle.lambda_group && oracle.lambda_group > 0.0);
    }
    if cfg.k() >= 2 {
        debug_assert!(oracle.lambda1 > oracle.lambda_cluster && oracle.lambda_cluster > 0.0);
    }
    if cfg.h() >= 2 && cfg.k() >= 2 {
        debug_assert!(oracle.lambda_group > oracle.lambda_cross.abs() - 1e-12);
        debug_assert!(oracle.lambda_cluster > oracle.lambda_cross.abs() - 1e-12);
    }
    Ok(oracle)
}

/// The canonical flat embedding T whose columns are 1/sqrt(n) and the
/// orthonormal cluster-step vectors; rows are identical within a canonical
/// cluster and sqrt(2k/n) apart across clusters.
pub fn canonical_embedding(n: usize, k: usize) -> Result<Array2<f64>> {
    if k == 0 || n == 0 || n % k != 0 {
        return Err(Error::Indivisible { n, k });
    }
    let block = n / k;
    let mut t = Array2::zeros((n, k));
    let inv_sqrt_n = 1.0 / (n as f64).sqrt();
    for row in 0..n {
        t[[row, 0]] = inv_sqrt_n;
    }
    for i in 1..k {
        let remaining = (k - i) as f64;
        let q = 1.0 / ((block as f64) * (remaining * remaining + remaining)).sqrt();
        for row in 0..n {
            let cluster = row / block;
            t[[row, i]] = match cluster.cmp(&(i - 1)) {
                std::cmp::Ordering::Less => 0.0,
                std::cmp::Ordering::Equal => remaining * q,
                std::cmp::Ordering::Greater => -q,
            };
        }
    }
    Ok(t)
}

/// Reassigns each vertex of the first group to the second one independently
/// with probability `p`. Defined for exactly two groups; if the first group
/// empties (p = 1 or by chance), the result collapses to a single group.
pub fn perturb_groups(
    groups: &GroupAssignment,
    p: f64,
    rng: &mut impl Rng,
) -> Result<GroupAssignment> {
    if groups.h() != 2 {
        return Err(Error::UnsupportedGroupCount(groups.h()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Config(format!(
            "perturbation probability {p} outside [0, 1]"
        )));
    }
    let labels: Vec<usize> = groups
        .labels()
        .iter()
        .map(|&l| {
            if l == 0 && rng.gen::<f64>() < p {
                1
            } else {
                l
            }
        })
        .collect();
    if labels.iter().all(|&l| l == 1) {
        return Ok(GroupAssignment::single_group(groups.n()));
    }
    GroupAssignment::new(2, labels)
}

/// Random graph on 12*scale vertices where a pair connects with probability
/// `a` when both endpoints share a planted cluster or both lie in the second
/// group, and with probability `b` otherwise. The planted proportional
/// 2-clustering is recoverable from the full graph but not from the subgraph
/// induced by the second group.
pub fn counterexample_graph(
    scale: usize,
    a: f64,
    b: f64,
    rng: &mut impl Rng,
) -> Result<(Graph, Clustering, GroupAssignment)> {
    if scale < 1 {
        return Err(Error::Config("scale must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) || a <= b {
        return Err(Error::Config(format!(
            "probabilities must satisfy 0 <= b < a <= 1, got a={a}, b={b}"
        )));
    }
    let s = scale;
    let n = 12 * s;
    // clusters: first half / second half; groups interleave in blocks of 3s
    let clusters: Vec<usize> = (0..n).map(|v| if v < 6 * s { 0 } else { 1 }).collect();
    let groups: Vec<usize> = (0..n).map(|v| if (v / (3 * s)) % 2 == 0 { 0 } else { 1 }).collect();

    let master = rng.gen::<u64>();
    let weights = sample_pair_matrix(n, master, |i, j| {
        if clusters[i] == clusters[j] || (groups[i] == 1 && groups[j] == 1) {
            a
        } else {
            b
        }
    });
    let graph = Graph::from_weights(weights)?;
    Ok((
        graph,
        Clustering::new(2, clusters)?,
        GroupAssignment::new(2, groups)?,
    ))
}
