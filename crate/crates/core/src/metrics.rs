//! Misclassification error under the best label permutation, and the
//! consolidated per-clustering report.

use crate::error::{Error, Result};
use crate::fairness::{balance_profile, GroupAssignment};
use crate::graph::{ncut, ratio_cut, Clustering, Graph};

/// Minimum-cost assignment on a square cost matrix via the Hungarian
/// algorithm with potentials; returns the column matched to each row.
fn min_cost_assignment(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    const INF: i64 = i64::MAX / 4;
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut matched_row = vec![0usize; n + 1]; // column -> row (1-based, 0 = unmatched)
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0usize; n];
    for j in 1..=n {
        if matched_row[j] > 0 {
            assignment[matched_row[j] - 1] = j - 1;
        }
    }
    assignment
}

/// Fraction of vertices misclassified under the best permutation of predicted
/// cluster indices, computed via maximum-agreement assignment on the k x k
/// confusion matrix.
pub fn misclassification_error(pred: &Clustering, truth: &Clustering) -> Result<f64> {
    if pred.n() != truth.n() {
        return Err(Error::LengthMismatch {
            left: pred.n(),
            right: truth.n(),
        });
    }
    if pred.k() != truth.k() {
        return Err(Error::KMismatch {
            pred: pred.k(),
            truth: truth.k(),
        });
    }
    let k = pred.k();
    let n = pred.n();
    let mut confusion = vec![vec![0i64; k]; k];
    for (p, t) in pred.labels().iter().zip(truth.labels()) {
        confusion[*p][*t] += 1;
    }
    // maximize agreement = minimize negated confusion
    let cost: Vec<Vec<i64>> = confusion
        .iter()
        .map(|row| row.iter().map(|&c| -c).collect())
        .collect();
    let assignment = min_cost_assignment(&cost);
    let agreement: i64 = assignment
        .iter()
        .enumerate()
        .map(|(p, &t)| confusion[p][t])
        .sum();
    Ok(1.0 - agreement as f64 / n as f64)
}

/// Summary of a clustering against a graph, group assignment, and optional
/// reference clustering. `runtime_ms` is not measured here; callers that time
/// an algorithm fill it in.
#[derive(Debug, Clone)]
pub struct ClusteringReport {
    pub error: Option<f64>,
    pub balances: Vec<f64>,
    pub balance_avg: f64,
    pub ratio_cut: f64,
    pub ncut: f64,
    pub runtime_ms: f64,
}

pub fn report(
    g: &Graph,
    c: &Clustering,
    groups: &GroupAssignment,
    truth: Option<&Clustering>,
) -> Result<ClusteringReport> {
    let profile = balance_profile(c, groups)?;
    let error = truth.map(|t| misclassification_error(c, t)).transpose()?;
    Ok(ClusteringReport {
        error,
        balances: profile.per_cluster,
        balance_avg: profile.average,
        ratio_cut: ratio_cut(g, c)?,
        ncut: ncut(g, c)?,
        runtime_ms: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use approx::assert_abs_diff_eq;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_clusterings_have_zero_error() {
        let c = Clustering::new(3, vec![0, 1, 2, 0, 1, 2]).unwrap();
        assert_abs_diff_eq!(misclassification_error(&c, &c).unwrap(), 0.0);
    }

    #[test]
    fn permuted_labels_have_zero_error() {
        let truth = Clustering::new(3, vec![0, 1, 2, 0, 1, 2]).unwrap();
        let pred = Clustering::new(3, vec![2, 0, 1, 2, 0, 1]).unwrap();
        assert_abs_diff_eq!(misclassification_error(&pred, &truth).unwrap(), 0.0);
    }

    #[test]
    fn single_flip_costs_one_vertex() {
        let truth = Clustering::new(2, vec![0, 0, 0, 0, 0, 1, 1, 1, 1, 1]).unwrap();
        let pred = Clustering::new(2, vec![0, 0, 0, 0, 1, 1, 1, 1, 1, 1]).unwrap();
        assert_abs_diff_eq!(misclassification_error(&pred, &truth).unwrap(), 0.1);
    }

    #[test]
    fn mismatches_are_rejected() {
        let a = Clustering::new(2, vec![0, 1]).unwrap();
        let b = Clustering::new(2, vec![0, 1, 0]).unwrap();
        assert!(matches!(
            misclassification_error(&a, &b),
            Err(Error::LengthMismatch { .. })
        ));
        let c = Clustering::new(3, vec![0, 1]).unwrap();
        assert!(matches!(
            misclassification_error(&a, &c),
            Err(Error::KMismatch { pred: 2, truth: 3 })
        ));
    }

    // all permutations of 0..k via Heap's algorithm
    fn permutations(k: usize) -> Vec<Vec<usize>> {
        let mut items: Vec<usize> = (0..k).collect();
        let mut out = Vec::new();
        fn heap(n: usize, items: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if n <= 1 {
                out.push(items.clone());
                return;
            }
            for i in 0..n - 1 {
                heap(n - 1, items, out);
                if n % 2 == 0 {
                    items.swap(i, n - 1);
                } else {
                    items.swap(0, n - 1);
                }
            }
            heap(n - 1, items, out);
        }
        heap(k, &mut items, &mut out);
        out
    }

    fn brute_force_error(pred: &Clustering, truth: &Clustering) -> f64 {
        let k = pred.k();
        let n = pred.n();
        let mut best = usize::MAX;
        for perm in permutations(k) {
            let disagreements = pred
                .labels()
                .iter()
                .zip(truth.labels())
                .filter(|(&p, &t)| perm[p] != t)
                .count();
            best = best.min(disagreements);
        }
        best as f64 / n as f64
    }

    #[test]
    fn assignment_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..60 {
            let k = rng.gen_range(2..=5);
            let n = rng.gen_range(k..=25);
            let mut pred_labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
            let mut truth_labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
            for l in 0..k {
                pred_labels[l] = l;
                truth_labels[n - 1 - l] = l;
            }
            let pred = Clustering::new(k, pred_labels).unwrap();
            let truth = Clustering::new(k, truth_labels).unwrap();
            let fast = misclassification_error(&pred, &truth).unwrap();
            let brute = brute_force_error(&pred, &truth);
            assert_abs_diff_eq!(fast, brute, epsilon = 1e-12);
        }
    }

    #[test]
    fn error_is_invariant_under_relabeling_either_side() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..20 {
            let k = rng.gen_range(2..=4);
            let n = rng.gen_range(k + 2..=20);
            let mut pred_labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
            let mut truth_labels: Vec<usize> = (0..n).map(|_| rng.gen_range(0..k)).collect();
            for l in 0..k {
                pred_labels[l] = l;
                truth_labels[l] = l;
            }
            let perm = {
                let mut p: Vec<usize> = (0..k).collect();
                p.shuffle(&mut rng);
                p
            };
            let pred = Clustering::new(k, pred_labels.clone()).unwrap();
            let truth = Clustering::new(k, truth_labels.clone()).unwrap();
            let pred_relabeled =
                Clustering::new(k, pred_labels.iter().map(|&l| perm[l]).collect()).unwrap();
            let truth_relabeled =
                Clustering::new(k, truth_labels.iter().map(|&l| perm[l]).collect()).unwrap();
            let base = misclassification_error(&pred, &truth).unwrap();
            assert_abs_diff_eq!(
                misclassification_error(&pred_relabeled, &truth).unwrap(),
                base
            );
            assert_abs_diff_eq!(
                misclassification_error(&pred, &truth_relabeled).unwrap(),
                base
            );
        }
    }

    fn two_cliques() -> Graph {
        Graph::from_edges(
            6,
            &[
                (0, 1, 1.0),
                (0, 2, 1.0),
                (1, 2, 1.0),
                (3, 4, 1.0),
                (3, 5, 1.0),
                (4, 5, 1.0),
            ],
        )
        .unwrap()
    }

    #[test]
    fn report_on_exact_two_clique_clustering() {
        let g = two_cliques();
        let c = Clustering::new(2, vec![0, 0, 0, 1, 1, 1]).unwrap();
        let groups = GroupAssignment::new(2, vec![0, 1, 0, 1, 0, 1]).unwrap();
        let r = report(&g, &c, &groups, Some(&c)).unwrap();
        assert_abs_diff_eq!(r.error.unwrap(), 0.0);
        assert_abs_diff_eq!(r.ratio_cut, 0.0);
        assert_abs_diff_eq!(r.ncut, 0.0);
        // swapped labels give an identical report
        let swapped = Clustering::new(2, vec![1, 1, 1, 0, 0, 0]).unwrap();
        let r2 = report(&g, &swapped, &groups, Some(&c)).unwrap();
        assert_abs_diff_eq!(r2.error.unwrap(), 0.0);
        assert_abs_diff_eq!(r2.balance_avg, r.balance_avg);
        assert_abs_diff_eq!(r2.ratio_cut, r.ratio_cut);
    }

    #[test]
    fn report_on_k4_split() {
        let mut edges = Vec::new();
        for i in 0..4 {
            for j in (i + 1)..4 {
                edges.push((i, j, 1.0));
            }
        }
        let g = Graph::from_edges(4, &edges).unwrap();
        let c = Clustering::new(2, vec![0, 0, 1, 1]).unwrap();
        let groups = GroupAssignment::new(2, vec![0, 1, 0, 1]).unwrap();
        let r = report(&g, &c, &groups, None).unwrap();
        assert!(r.error.is_none());
        assert_abs_diff_eq!(r.ratio_cut, 4.0);
        assert_abs_diff_eq!(r.ncut, 4.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.balance_avg, 1.0);
    }
}
