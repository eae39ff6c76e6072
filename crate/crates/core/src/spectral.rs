//! The four spectral clustering variants: standard and proportionality-
//! constrained, each in an unnormalized and a normalized form.
//!
//! All variants compute an n x k embedding H and cluster its rows with
//! seeded k-means (10 replicates). The constrained variants restrict the
//! relaxation to the nullspace of the constraint matrix transpose, so
//! F^T H = 0 holds by construction.

use ndarray::{Array1, Array2};
use rand::Rng;

use crate::error::{Error, Result};
use crate::fairness::{fairness_matrix, GroupAssignment};
use crate::graph::{Clustering, Graph};
use crate::kmeans::{kmeans, PointSet};
use crate::linalg::{nullspace_basis, smallest_eigenpairs, spd_sqrt_inv};

/// Replicate count used by every variant's k-means step.
pub const KMEANS_REPLICATES: usize = 10;

/// Eigengap below which a warning is logged: the chosen k-dimensional
/// eigenspace is then not well separated.
const EIGENGAP_WARN_TOL: f64 = 1e-9;

/// Which algorithm produced an embedding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EmbeddingKind {
    Unnormalized,
    Normalized,
    FairUnnormalized,
    FairNormalized,
}

impl EmbeddingKind {
    /// Embeddings of the normalized variants are orthonormal in the degree
    /// inner product (H^T D H = I); the unnormalized ones in the plain one.
    pub fn is_normalized(self) -> bool {
        matches!(self, Self::Normalized | Self::FairNormalized)
    }

    pub fn is_fair(self) -> bool {
        matches!(self, Self::FairUnnormalized | Self::FairNormalized)
    }
}

/// The n x k matrix whose rows are fed to k-means, with its provenance.
#[derive(Debug, Clone)]
pub struct Embedding {
    matrix: Array2<f64>,
    kind: EmbeddingKind,
}

impl Embedding {
    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn kind(&self) -> EmbeddingKind {
        self.kind
    }
}

fn check_k(k: usize, max: usize) -> Result<()> {
    if k < 1 || k > max {
        return Err(Error::InvalidK { k, max });
    }
    Ok(())
}

fn check_no_isolated_vertex(degrees: &Array1<f64>) -> Result<()> {
    if let Some(v) = degrees.iter().position(|&d| d < 1e-12) {
        return Err(Error::IsolatedVertex(v));
    }
    Ok(())
}

/// k smallest eigenvectors of `m`, warning when the gap behind them is
/// numerically degenerate.
fn spectral_basis(m: &Array2<f64>, k: usize) -> Result<Array2<f64>> {
    let dim = m.nrows();
    let count = (k + 1).min(dim);
    let pairs = smallest_eigenpairs(m, count)?;
    if count > k {
        let gap = pairs.values()[k] - pairs.values()[k - 1];
        if gap.abs() < EIGENGAP_WARN_TOL {
            log::warn!(
                "eigengap at position {k} is {gap:.3e}; the embedding basis is not unique"
            );
        }
    }
    Ok(pairs.vectors().slice(ndarray::s![.., ..k]).to_owned())
}

fn cluster_rows(h: Array2<f64>, kind: EmbeddingKind, k: usize, rng: &mut impl Rng) -> Result<(Clustering, Embedding)> {
    let points = PointSet::new(h.clone())?;
    let (clustering, _cost) = kmeans(&points, k, KMEANS_REPLICATES, rng)?;
    Ok((clustering, Embedding { matrix: h, kind }))
}

fn scale_rows(m: &Array2<f64>, scales: &Array1<f64>) -> Array2<f64> {
    let mut out = m.clone();
    for (mut row, &s) in out.rows_mut().into_iter().zip(scales.iter()) {
        row.mapv_inplace(|x| x * s);
    }
    out
}

/// Standard spectral clustering: k-means on the rows of the matrix of k
/// smallest Laplacian eigenvectors.
pub fn sc_unnormalized(
    g: &Graph,
    k: usize,
    rng: &mut impl Rng,
) -> Result<(Clustering, Embedding)> {
    check_k(k, g.n())?;
    let h = spectral_basis(&g.laplacian(), k)?;
    cluster_rows(h, EmbeddingKind::Unnormalized, k, rng)
}

/// Normalized spectral clustering: eigenvectors T of D^{-1/2} L D^{-1/2},
/// k-means on the rows of H = D^{-1/2} T. Rejects isolated vertices.
pub fn sc_normalized(g: &Graph, k: usize, rng: &mut impl Rng) -> Result<(Clustering, Embedding)> {
    check_k(k, g.n())?;
    let degrees = g.degrees();
    check_no_isolated_vertex(&degrees)?;
    let inv_sqrt = degrees.mapv(|d| 1.0 / d.sqrt());
    let lap = g.laplacian();
    let n = g.n();
    let lsym = Array2::from_shape_fn((n, n), |(i, j)| lap[[i, j]] * inv_sqrt[i] * inv_sqrt[j]);
    let t = spectral_basis(&lsym, k)?;
    let h = scale_rows(&t, &inv_sqrt);
    cluster_rows(h, EmbeddingKind::Normalized, k, rng)
}

/// Unnormalized spectral clustering under the proportionality constraint:
/// Y holds the k smallest eigenvectors of Z^T L Z for an orthonormal
/// nullspace basis Z of F^T, and k-means runs on the rows of H = Z Y.
///
/// With a single group the constraint is empty and this reduces to
/// [`sc_unnormalized`].
pub fn fair_sc_unnormalized(
    g: &Graph,
    k: usize,
    groups: &GroupAssignment,
    rng: &mut impl Rng,
) -> Result<(Clustering, Embedding)> {
    if g.n() != groups.n() {
        return Err(Error::LengthMismatch {
            left: g.n(),
            right: groups.n(),
        });
    }
    if groups.h() == 1 {
        return sc_unnormalized(g, k, rng);
    }
    check_k(k, g.n() - groups.h() + 1)?;
    let f = fairness_matrix(groups)?;
    let z = nullspace_basis(&f.t().to_owned())?;
    let lap = g.laplacian();
    let constrained = z.t().dot(&lap.dot(&z));
    let y = spectral_basis(&constrained, k)?;
    let h = z.dot(&y);
    cluster_rows(h, EmbeddingKind::FairUnnormalized, k, rng)
}

/// Normalized spectral clustering under the proportionality constraint:
/// with Q the SPD square root of Z^T D Z and X the k smallest eigenvectors
/// of Q^{-1} Z^T L Z Q^{-1}, k-means runs on the rows of H = Z Q^{-1} X.
///
/// With a single group this reduces to [`sc_normalized`].
pub fn fair_sc_normalized(
    g: &Graph,
    k: usize,
    groups: &GroupAssignment,
    rng: &mut impl Rng,
) -> Result<(Clustering, Embedding)> {
    if g.n() != groups.n() {
        return Err(Error::LengthMismatch {
            left: g.n(),
            right: groups.n(),
        });
    }
    let degrees = g.degrees();
    check_no_isolated_vertex(&degrees)?;
    if groups.h() == 1 {
        return sc_normalized(g, k, rng);
    }
    check_k(k, g.n() - groups.h() + 1)?;
    let f = fairness_matrix(groups)?;
    let z = nullspace_basis(&f.t().to_owned())?;
    let dz = scale_rows(&z, &degrees);
    let zdz = z.t().dot(&dz);
    let (_, q_inv) = spd_sqrt_inv(&zdz).map_err(|err| match err {
        // a non-definite Z^T D Z only arises from vanishing degrees
        Error::NotPositiveDefinite { .. } => {
            let worst = degrees
                .iter()
                .enumerate()
                .min_by(|x, y| x.1.partial_cmp(y.1).unwrap())
                .map(|(i, _)| i)
                .unwrap_or(0);
            Error::IsolatedVertex(worst)
        }
        other => other,
    })?;
    let lap = g.laplacian();
    let constrained = z.t().dot(&lap.dot(&z));
    let sandwiched = q_inv.dot(&constrained).dot(&q_inv);
    let x = spectral_basis(&sandwiched, k)?;
    let h = z.dot(&q_inv.dot(&x));
    cluster_rows(h, EmbeddingKind::FairNormalized, k, rng)
}
