//! Weighted undirected graphs, Laplacians, and the cut objectives.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Undirected graph with a dense symmetric non-negative weight matrix and an
/// empty diagonal.
#[derive(Debug, Clone)]
pub struct Graph {
    weights: Array2<f64>,
}

impl Graph {
    /// Builds a graph from a dense weight matrix.
    ///
    /// The matrix must be square with non-negative finite entries and zero
    /// diagonal. Asymmetry up to `1e-9 * (1 + max|w|)` is tolerated and
    /// symmetrized away; anything larger is rejected.
    pub fn from_weights(weights: Array2<f64>) -> Result<Self> {
        let (rows, cols) = weights.dim();
        if rows != cols {
            return Err(Error::InvalidGraph(format!(
                "weight matrix is {rows}x{cols}, expected square"
            )));
        }
        let mut max_abs = 0.0f64;
        for &w in weights.iter() {
            if !w.is_finite() {
                return Err(Error::InvalidGraph("non-finite weight".into()));
            }
            max_abs = max_abs.max(w.abs());
        }
        let tol = 1e-9 * (1.0 + max_abs);
        for i in 0..rows {
            if weights[[i, i]].abs() > tol {
                return Err(Error::InvalidGraph(format!(
                    "nonzero diagonal entry at vertex {i}"
                )));
            }
            for j in (i + 1)..cols {
                if (weights[[i, j]] - weights[[j, i]]).abs() > tol {
                    return Err(Error::InvalidGraph(format!(
                        "asymmetric weights at ({i}, {j})"
                    )));
                }
                if weights[[i, j]] < -tol || weights[[j, i]] < -tol {
                    return Err(Error::InvalidGraph(format!(
                        "negative weight at ({i}, {j})"
                    )));
                }
            }
        }
        // Store the invariant exactly.
        let mut w = weights;
        for i in 0..rows {
            w[[i, i]] = 0.0;
            for j in (i + 1)..cols {
                let avg = 0.5 * (w[[i, j]] + w[[j, i]]);
                let avg = avg.max(0.0);
                w[[i, j]] = avg;
                w[[j, i]] = avg;
            }
        }
        Ok(Self { weights: w })
    }

    /// Builds a graph from an undirected edge list; each edge may appear once.
    ///
    /// The `line` reported in errors is the 1-based index of the offending
    /// entry.
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut weights = Array2::zeros((n, n));
        for (idx, &(i, j, w)) in edges.iter().enumerate() {
            let line = idx + 1;
            insert_edge(&mut weights, n, line, i, j, w)?;
        }
        Ok(Self { weights })
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    /// Vertex degrees d_i = sum_j w_ij.
    pub fn degrees(&self) -> Array1<f64> {
        self.weights.sum_axis(ndarray::Axis(1))
    }

    /// Number of undirected edges with nonzero weight.
    pub fn edge_count(&self) -> usize {
        let n = self.n();
        let mut count = 0;
        for i in 0..n {
            for j in (i + 1)..n {
                if self.weights[[i, j]] != 0.0 {
                    count += 1;
                }
            }
        }
        count
    }

    /// Unnormalized Laplacian L = D - W.
    pub fn laplacian(&self) -> Array2<f64> {
        let n = self.n();
        let degrees = self.degrees();
        let mut lap = -self.weights.clone();
        for i in 0..n {
            lap[[i, i]] = degrees[i];
        }
        lap
    }

    /// Subgraph induced by `vertices` (kept in the given order).
    pub fn induced_subgraph(&self, vertices: &[usize]) -> Result<Graph> {
        let n = self.n();
        for &v in vertices {
            if v >= n {
                return Err(Error::InvalidGraph(format!(
                    "vertex {v} out of range for n = {n}"
                )));
            }
        }
        let m = vertices.len();
        let weights = Array2::from_shape_fn((m, m), |(i, j)| {
            self.weights[[vertices[i], vertices[j]]]
        });
        Ok(Graph { weights })
    }

    /// Component id per vertex, ids numbered by first occurrence.
    pub fn connected_components(&self) -> Vec<usize> {
        let n = self.n();
        let mut comp = vec![usize::MAX; n];
        let mut next = 0;
        let mut stack = Vec::new();
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = next;
            stack.push(start);
            while let Some(v) = stack.pop() {
                for u in 0..n {
                    if self.weights[[v, u]] != 0.0 && comp[u] == usize::MAX {
                        comp[u] = next;
                        stack.push(u);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    /// Largest connected component as a subgraph, together with the original
    /// vertex ids of its members (ascending).
    pub fn largest_component(&self) -> (Graph, Vec<usize>) {
        let comp = self.connected_components();
        let n_comps = comp.iter().copied().max().map_or(0, |m| m + 1);
        let mut sizes = vec![0usize; n_comps];
        for &c in &comp {
            sizes[c] += 1;
        }
        let best = (0..n_comps).max_by_key(|&c| sizes[c]).unwrap_or(0);
        let vertices: Vec<usize> = (0..self.n()).filter(|&v| comp[v] == best).collect();
        let sub = self
            .induced_subgraph(&vertices)
            .expect("component vertices are in range");
        (sub, vertices)
    }
}

fn insert_edge(
    weights: &mut Array2<f64>,
    n: usize,
    line: usize,
    i: usize,
    j: usize,
    w: f64,
) -> Result<()> {
    if i >= n {
        return Err(Error::IndexOutOfRange { line, id: i, n });
    }
    if j >= n {
        return Err(Error::IndexOutOfRange { line, id: j, n });
    }
    if i == j {
        return Err(Error::SelfLoop { line, vertex: i });
    }
    if w < 0.0 {
        return Err(Error::NegativeWeight { line, weight: w });
    }
    if !(w.is_finite() && w > 0.0) {
        return Err(Error::Parse {
            line,
            msg: format!("edge weight must be a positive decimal, got {w}"),
        });
    }
    if weights[[i, j]] != 0.0 {
        let (a, b) = (i.min(j), i.max(j));
        return Err(Error::DuplicateEdge { line, i: a, j: b });
    }
    weights[[i, j]] = w;
    weights[[j, i]] = w;
    Ok(())
}

/// Assignment of each vertex to one of `k` clusters, labels 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Clustering {
    k: usize,
    labels: Vec<usize>,
}

impl Clustering {
    pub fn new(k: usize, labels: Vec<usize>) -> Result<Self> {
        if k < 1 {
            return Err(Error::InvalidK { k, max: labels.len() });
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::Config(format!(
                "cluster label {bad} out of range for k = {k}"
            )));
        }
        Ok(Self { k, labels })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    /// Member count per cluster; entries may be zero.
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

fn check_lengths(g: &Graph, c: &Clustering) -> Result<()> {
    if g.n() != c.n() {
        return Err(Error::LengthMismatch {
            left: g.n(),
            right: c.n(),
        });
    }
    Ok(())
}

fn cut_weights(g: &Graph, c: &Clustering) -> Vec<f64> {
    let n = g.n();
    let w = g.weights();
    let mut cut = vec![0.0f64; c.k()];
    for i in 0..n {
        for j in (i + 1)..n {
            if c.labels()[i] != c.labels()[j] && w[[i, j]] != 0.0 {
                cut[c.labels()[i]] += w[[i, j]];
                cut[c.labels()[j]] += w[[i, j]];
            }
        }
    }
    cut
}

/// RatioCut: sum over clusters of cut(C_l, rest) / |C_l|.
pub fn ratio_cut(g: &Graph, c: &Clustering) -> Result<f64> {
    check_lengths(g, c)?;
    let sizes = c.cluster_sizes();
    if let Some(l) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::EmptyCluster(l));
    }
    let cut = cut_weights(g, c);
    Ok(cut
        .iter()
        .zip(&sizes)
        .map(|(&cw, &s)| cw / s as f64)
        .sum())
}

/// NCut: sum over clusters of cut(C_l, rest) / vol(C_l).
pub fn ncut(g: &Graph, c: &Clustering) -> Result<f64> {
    check_lengths(g, c)?;
    let sizes = c.cluster_sizes();
    if let Some(l) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::EmptyCluster(l));
    }
    let degrees = g.degrees();
    let mut vol = vec![0.0f64; c.k()];
    for (i, &l) in c.labels().iter().enumerate() {
        vol[l] += degrees[i];
    }
    if let Some(l) = vol.iter().position(|&v| v <= 0.0) {
        return Err(Error::ZeroVolume(l));
    }
    let cut = cut_weights(g, c);
    Ok(cut.iter().zip(&vol).map(|(&cw, &v)| cw / v).sum())
}

/// Parses the edge-list format: one `<i> <j> <w>` edge per line, 0-based ids,
/// `#` starts a comment line.
pub fn parse_edge_list(text: &str, n: usize) -> Result<Graph> {
    let mut weights = Array2::zeros((n, n));
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let (fi, fj, fw) = match (fields.next(), fields.next(), fields.next(), fields.next()) {
            (Some(a), Some(b), Some(c), None) => (a, b, c),
            _ => {
                return Err(Error::Parse {
                    line,
                    msg: "expected exactly three fields: <i> <j> <w>".into(),
                })
            }
        };
        let i: usize = fi.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("invalid vertex id {fi:?}"),
        })?;
        let j: usize = fj.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("invalid vertex id {fj:?}"),
        })?;
        let w: f64 = fw.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("invalid weight {fw:?}"),
        })?;
        insert_edge(&mut weights, n, line, i, j, w)?;
    }
    Ok(Graph { weights })
}

/// Serializes a graph in the edge-list format, each undirected edge once with
/// i < j.
pub fn write_edge_list(g: &Graph) -> String {
    let n = g.n();
    let w = g.weights();
    let mut out = String::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if w[[i, j]] != 0.0 {
                out.push_str(&format!("{} {} {}\n", i, j, w[[i, j]]));
            }
        }
    }
    out
}

/// Parses a label file: one 0-based label per line, `#` comments allowed.
/// Used for both cluster and group label files.
pub fn parse_label_file(text: &str) -> Result<Vec<usize>> {
    let mut labels = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let label: usize = trimmed.parse().map_err(|_| Error::Parse {
            line,
            msg: format!("invalid label {trimmed:?}"),
        })?;
        labels.push(label);
    }
    Ok(labels)
}

/// Serializes labels, one per line.
pub fn write_label_file(labels: &[usize]) -> String {
    let mut out = String::new();
    for &l in labels {
        out.push_str(&format!("{l}\n"));
    }
    out
}
