//! k-means++ seeding and Lloyd refinement, run as independent seeded
//! replicates.
//!
//! Replicates run in parallel when the `parallel` feature is enabled; the
//! result is seed-deterministic either way because every replicate derives
//! its own sub-seed and the merge is min-cost with lowest-index tie-break.

use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Clustering;

pub const MAX_LLOYD_ITERATIONS: usize = 300;

/// Points as rows of an n x m coordinate matrix.
#[derive(Debug, Clone)]
pub struct PointSet {
    coords: Array2<f64>,
}

impl PointSet {
    pub fn new(coords: Array2<f64>) -> Result<Self> {
        if coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::Config("point coordinates must be finite".into()));
        }
        Ok(Self { coords })
    }

    pub fn n(&self) -> usize {
        self.coords.nrows()
    }

    pub fn dim(&self) -> usize {
        self.coords.ncols()
    }

    pub fn coords(&self) -> &Array2<f64> {
        &self.coords
    }
}

/// One seeded replicate: k-means++ initialization followed by Lloyd
/// iterations until the assignment stabilizes.
#[derive(Debug, Clone)]
pub struct SingleRun {
    pub clustering: Clustering,
    pub cost: f64,
    /// Total squared distance to the nearest center recorded at each
    /// assignment step; non-increasing over the run.
    pub assignment_costs: Vec<f64>,
}

fn dist_sq(points: &PointSet, i: usize, center: &[f64]) -> f64 {
    let row = points.coords.row(i);
    row.iter()
        .zip(center)
        .map(|(&x, &c)| (x - c) * (x - c))
        .sum()
}

fn kmeans_pp_centers(points: &PointSet, k: usize, rng: &mut impl Rng) -> Array2<f64> {
    let n = points.n();
    let dim = points.dim();
    let mut centers = Array2::zeros((k, dim));
    let first = rng.gen_range(0..n);
    centers.row_mut(0).assign(&points.coords.row(first));

    let mut d2: Vec<f64> = (0..n)
        .map(|i| dist_sq(points, i, centers.row(0).as_slice().unwrap()))
        .collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let chosen = if total > 0.0 {
            // selection probability proportional to squared distance
            let target = rng.gen::<f64>() * total;
            let mut acc = 0.0;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if target < acc {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        centers.row_mut(c).assign(&points.coords.row(chosen));
        for i in 0..n {
            let d = dist_sq(points, i, centers.row(c).as_slice().unwrap());
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }
    centers
}

/// Nearest-center assignment; ties break toward the lowest center index.
fn assign(points: &PointSet, centers: &Array2<f64>) -> (Vec<usize>, f64) {
    let n = points.n();
    let k = centers.nrows();
    let mut labels = vec![0usize; n];
    let mut cost = 0.0;
    for i in 0..n {
        let mut best = 0usize;
        let mut best_d = dist_sq(points, i, centers.row(0).as_slice().unwrap());
        for c in 1..k {
            let d = dist_sq(points, i, centers.row(c).as_slice().unwrap());
            if d < best_d {
                best_d = d;
                best = c;
            }
        }
        labels[i] = best;
        cost += best_d;
    }
    (labels, cost)
}

/// Moves, for each empty cluster, the point farthest from its current center
/// out of a cluster that can spare one. Returns whether anything moved.
fn repair_empty_clusters(
    points: &PointSet,
    centers: &Array2<f64>,
    labels: &mut [usize],
    k: usize,
) -> bool {
    let mut sizes = vec![0usize; k];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    let mut repaired = false;
    for empty in 0..k {
        if sizes[empty] > 0 {
            continue;
        }
        let mut donor: Option<(usize, f64)> = None;
        for (i, &l) in labels.iter().enumerate() {
            if sizes[l] < 2 {
                continue;
            }
            let d = dist_sq(points, i, centers.row(l).as_slice().unwrap());
            if donor.map_or(true, |(_, best)| d > best) {
                donor = Some((i, d));
            }
        }
        let (point, _) = donor.expect("k <= n guarantees a donor cluster with >= 2 points");
        sizes[labels[point]] -= 1;
        labels[point] = empty;
        sizes[empty] = 1;
        repaired = true;
    }
    repaired
}

fn centroids(points: &PointSet, labels: &[usize], k: usize) -> Array2<f64> {
    let dim = points.dim();
    let mut centers = Array2::zeros((k, dim));
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        let mut row = centers.row_mut(l);
        row += &points.coords.row(i);
        counts[l] += 1;
    }
    for (mut row, &count) in centers.rows_mut().into_iter().zip(&counts) {
        if count > 0 {
            row.mapv_inplace(|v| v / count as f64);
        }
    }
    centers
}

fn cost_given_labels(points: &PointSet, labels: &[usize], k: usize) -> f64 {
    let centers = centroids(points, labels, k);
    labels
        .iter()
        .enumerate()
        .map(|(i, &l)| dist_sq(points, i, centers.row(l).as_slice().unwrap()))
        .sum()
}

fn lloyd(points: &PointSet, k: usize, mut centers: Array2<f64>) -> SingleRun {
    let n = points.n();
    let mut labels = vec![usize::MAX; n];
    let mut assignment_costs = Vec::new();
    for _ in 0..MAX_LLOYD_ITERATIONS {
        let (new_labels, cost) = assign(points, &centers);
        assignment_costs.push(cost);
        let stable = new_labels == labels;
        labels = new_labels;
        let repaired = repair_empty_clusters(points, &centers, &mut labels, k);
        if stable && !repaired {
            break;
        }
        centers = centroids(points, &labels, k);
    }
    let cost = cost_given_labels(points, &labels, k);
    let clustering = Clustering::new(k, labels).expect("labels are in range");
    SingleRun {
        clustering,
        cost,
        assignment_costs,
    }
}

fn run_single(points: &PointSet, k: usize, seed: u64) -> SingleRun {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let centers = kmeans_pp_centers(points, k, &mut rng);
    lloyd(points, k, centers)
}

/// One seeded k-means++ / Lloyd replicate.
pub fn kmeans_single(points: &PointSet, k: usize, seed: u64) -> Result<SingleRun> {
    if k < 1 || k > points.n() {
        return Err(Error::InvalidK { k, max: points.n() });
    }
    Ok(run_single(points, k, seed))
}

#[cfg(feature = "parallel")]
fn run_replicates(points: &PointSet, k: usize, seeds: &[u64]) -> Vec<SingleRun> {
    use rayon::prelude::*;
    seeds
        .par_iter()
        .map(|&seed| run_single(points, k, seed))
        .collect()
}

#[cfg(not(feature = "parallel"))]
fn run_replicates(points: &PointSet, k: usize, seeds: &[u64]) -> Vec<SingleRun> {
    seeds
        .iter()
        .map(|&seed| run_single(points, k, seed))
        .collect()
}

/// Runs `replicates` independent replicates and returns the clustering with
/// the lowest within-cluster sum of squared distances, plus that cost.
///
/// The output never contains an empty cluster.
pub fn kmeans(
    points: &PointSet,
    k: usize,
    replicates: usize,
    rng: &mut impl Rng,
) -> Result<(Clustering, f64)> {
    if k < 1 || k > points.n() {
        return Err(Error::InvalidK { k, max: points.n() });
    }
    assert!(replicates >= 1, "at least one replicate required");
    let seeds: Vec<u64> = (0..replicates).map(|_| rng.gen()).collect();
    let runs = run_replicates(points, k, &seeds);
    let best = runs
        .into_iter()
        .reduce(|best, run| if run.cost < best.cost { run } else { best })
        .expect("replicates >= 1");
    Ok((best.clustering, best.cost))
}

/// Sum of squared distances of each point to its cluster centroid.
pub fn kmeans_cost(points: &PointSet, c: &Clustering) -> Result<f64> {
    if c.n() != points.n() {
        return Err(Error::LengthMismatch {
            left: points.n(),
            right: c.n(),
        });
    }
    let sizes = c.cluster_sizes();
    if let Some(l) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::EmptyCluster(l));
    }
    Ok(cost_given_labels(points, c.labels(), c.k()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use ndarray::array;

    fn points_1d(xs: &[f64]) -> PointSet {
        PointSet::new(Array2::from_shape_vec((xs.len(), 1), xs.to_vec()).unwrap()).unwrap()
    }

    #[test]
    fn k_equals_n_gives_zero_cost() {
        let points = points_1d(&[0.0, 1.0, 5.0, 9.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (c, cost) = kmeans(&points, 4, 10, &mut rng).unwrap();
        assert_abs_diff_eq!(cost, 0.0);
        assert_eq!(c.cluster_sizes(), vec![1, 1, 1, 1]);
    }

    #[test]
    fn separated_blobs_are_split_exactly() {
        let coords = array![
            [0.0, 0.0],
            [1.0, 0.0],
            [0.0, 1.0],
            [100.0, 0.0],
            [101.0, 0.0],
            [100.0, 1.0],
        ];
        let points = PointSet::new(coords).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let (c, cost) = kmeans(&points, 2, 10, &mut rng).unwrap();
        assert_eq!(c.labels()[0], c.labels()[1]);
        assert_eq!(c.labels()[0], c.labels()[2]);
        assert_eq!(c.labels()[3], c.labels()[4]);
        assert_eq!(c.labels()[3], c.labels()[5]);
        assert_ne!(c.labels()[0], c.labels()[3]);
        // per-blob variance around the centroid (1/3, 1/3): 3 points each at
        // squared distance (1/3)^2*... compute directly
        let blob_cost = |pts: &[[f64; 2]]| -> f64 {
            let cx = pts.iter().map(|p| p[0]).sum::<f64>() / pts.len() as f64;
            let cy = pts.iter().map(|p| p[1]).sum::<f64>() / pts.len() as f64;
            pts.iter()
                .map(|p| (p[0] - cx).powi(2) + (p[1] - cy).powi(2))
                .sum()
        };
        let expected = blob_cost(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
            + blob_cost(&[[100.0, 0.0], [101.0, 0.0], [100.0, 1.0]]);
        assert_abs_diff_eq!(cost, expected, epsilon = 1e-12);
    }

    #[test]
    fn identical_points_give_zero_cost_and_no_empty_cluster() {
        let points = points_1d(&[2.0, 2.0, 2.0, 2.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (c, cost) = kmeans(&points, 2, 10, &mut rng).unwrap();
        assert_abs_diff_eq!(cost, 0.0);
        assert!(c.cluster_sizes().iter().all(|&s| s > 0));
    }

    #[test]
    fn seed_determinism() {
        let points = points_1d(&[0.0, 0.3, 1.1, 5.0, 5.5, 9.0]);
        let (c1, cost1) = kmeans(&points, 3, 10, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        let (c2, cost2) = kmeans(&points, 3, 10, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
        assert_eq!(c1.labels(), c2.labels());
        assert_eq!(cost1.to_bits(), cost2.to_bits());
    }

    #[test]
    fn rejects_invalid_k() {
        let points = points_1d(&[0.0, 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            kmeans(&points, 0, 1, &mut rng),
            Err(Error::InvalidK { .. })
        ));
        assert!(matches!(
            kmeans(&points, 3, 1, &mut rng),
            Err(Error::InvalidK { .. })
        ));
    }

    #[test]
    fn cost_examples() {
        let points = points_1d(&[0.0, 2.0]);
        let c = Clustering::new(1, vec![0, 0]).unwrap();
        assert_abs_diff_eq!(kmeans_cost(&points, &c).unwrap(), 2.0);
        let c = Clustering::new(2, vec![0, 1]).unwrap();
        assert_abs_diff_eq!(kmeans_cost(&points, &c).unwrap(), 0.0);
        // relabeling invariance
        let points = points_1d(&[0.0, 1.0, 4.0, 6.0]);
        let c = Clustering::new(2, vec![0, 0, 1, 1]).unwrap();
        let swapped = Clustering::new(2, vec![1, 1, 0, 0]).unwrap();
        assert_eq!(
            kmeans_cost(&points, &c).unwrap(),
            kmeans_cost(&points, &swapped).unwrap()
        );
        let empty = Clustering::new(3, vec![0, 0, 1, 1]).unwrap();
        assert!(matches!(
            kmeans_cost(&points, &empty),
            Err(Error::EmptyCluster(2))
        ));
    }

    #[test]
    fn lloyd_repairs_empty_cluster() {
        let points = points_1d(&[0.0, 1.0, 2.0]);
        // second center so far away it attracts nothing at first
        let centers = array![[0.5], [100.0]];
        let run = lloyd(&points, 2, centers);
        assert!(run.clustering.cluster_sizes().iter().all(|&s| s > 0));
        assert_eq!(run.clustering.labels(), &[0, 0, 1]);
        assert_abs_diff_eq!(run.cost, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn assignment_cost_trace_is_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for trial in 0..30 {
            let n = 12 + (trial % 5);
            let coords =
                Array2::from_shape_fn((n, 2), |_| rng.gen_range(-3.0..3.0));
            let points = PointSet::new(coords).unwrap();
            let run = kmeans_single(&points, 3, rng.gen()).unwrap();
            for pair in run.assignment_costs.windows(2) {
                assert!(
                    pair[1] <= pair[0] + 1e-9,
                    "cost increased: {} -> {}",
                    pair[0],
                    pair[1]
                );
            }
        }
    }

    #[test]
    fn plus_plus_seeding_distribution() {
        // points at 0, 1, 3 on a line; verify the first center is uniform and
        // the second follows the squared-distance law
        let points = points_1d(&[0.0, 1.0, 3.0]);
        let trials = 30_000usize;
        let mut first_counts = [0usize; 3];
        let mut pair_counts = [[0usize; 3]; 3];
        for t in 0..trials {
            let mut rng = ChaCha8Rng::seed_from_u64(t as u64);
            let centers = kmeans_pp_centers(&points, 2, &mut rng);
            let locate = |x: f64| [0.0, 1.0, 3.0].iter().position(|&p| p == x).unwrap();
            let f = locate(centers[[0, 0]]);
            let s = locate(centers[[1, 0]]);
            first_counts[f] += 1;
            pair_counts[f][s] += 1;
        }
        for &count in &first_counts {
            let p = count as f64 / trials as f64;
            assert!((p - 1.0 / 3.0).abs() < 0.02, "first-center p = {p}");
        }
        // conditional law given first center at x: P(second = y) ∝ (y - x)^2
        let xs: [f64; 3] = [0.0, 1.0, 3.0];
        for f in 0..3 {
            let weights: Vec<f64> = (0..3).map(|s| (xs[s] - xs[f]).powi(2)).collect();
            let total: f64 = weights.iter().sum();
            for s in 0..3 {
                let expected = weights[s] / total;
                let observed = pair_counts[f][s] as f64 / first_counts[f] as f64;
                assert!(
                    (observed - expected).abs() < 0.02,
                    "P(second={s}|first={f}): observed {observed}, expected {expected}"
                );
            }
        }
    }
}
