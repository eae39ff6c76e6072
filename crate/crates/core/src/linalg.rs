//! Dense symmetric eigendecomposition, orthonormal nullspace bases, and SPD
//! square roots.
//!
//! The heavy lifting is done by the system LAPACK (dsyevd / dgesdd); this
//! module owns the contracts: ascending eigenvalues, orthonormal columns,
//! explicit rank thresholds.

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Eigenvalues in ascending order with matching orthonormal eigenvectors as
/// columns.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    values: Array1<f64>,
    vectors: Array2<f64>,
}

impl EigenPairs {
    pub fn values(&self) -> &Array1<f64> {
        &self.values
    }

    pub fn vectors(&self) -> &Array2<f64> {
        &self.vectors
    }

    pub fn into_vectors(self) -> Array2<f64> {
        self.vectors
    }
}

/// Relative threshold below which singular values count as zero.
pub const RANK_REL_TOL: f64 = 1e-10;

fn require_square(s: &Array2<f64>) -> Result<usize> {
    let (rows, cols) = s.dim();
    if rows != cols {
        return Err(Error::Config(format!(
            "matrix is {rows}x{cols}, expected square"
        )));
    }
    Ok(rows)
}

/// Checks asymmetry against 1e-9 scaled by the matrix magnitude, then returns
/// the exactly symmetric average (S + S^T)/2.
fn symmetrize_checked(s: &Array2<f64>) -> Result<Array2<f64>> {
    let n = require_square(s)?;
    let max_abs = s.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let tol = 1e-9 * (1.0 + max_abs);
    let mut out = s.clone();
    let mut max_asymmetry = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            let diff = (s[[i, j]] - s[[j, i]]).abs();
            max_asymmetry = max_asymmetry.max(diff);
            let avg = 0.5 * (s[[i, j]] + s[[j, i]]);
            out[[i, j]] = avg;
            out[[j, i]] = avg;
        }
    }
    if max_asymmetry > tol {
        return Err(Error::NotSymmetric { max_asymmetry });
    }
    Ok(out)
}

/// Full symmetric eigendecomposition via LAPACK dsyevd. Input must already be
/// exactly symmetric; eigenvalues come back ascending.
fn sym_eig_all(s: &Array2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = require_square(s)?;
    if n == 0 {
        return Ok((Array1::zeros(0), Array2::zeros((0, 0))));
    }
    // A symmetric row-major buffer is its own column-major transpose, so it
    // can be handed to LAPACK as-is.
    let mut a: Vec<f64> = s.iter().copied().collect();
    let mut w = vec![0.0f64; n];
    let ni = n as i32;
    let mut info = 0i32;

    // workspace query
    let mut work_query = [0.0f64; 1];
    let mut iwork_query = [0i32; 1];
    unsafe {
        lapack_sys::dsyevd_(
            &(b'V' as i8),
            &(b'L' as i8),
            &ni,
            a.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            work_query.as_mut_ptr(),
            &(-1),
            iwork_query.as_mut_ptr(),
            &(-1),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::ConvergenceFailure { info });
    }
    let lwork = work_query[0] as usize;
    let liwork = iwork_query[0] as usize;
    let mut work = vec![0.0f64; lwork.max(1)];
    let mut iwork = vec![0i32; liwork.max(1)];
    unsafe {
        lapack_sys::dsyevd_(
            &(b'V' as i8),
            &(b'L' as i8),
            &ni,
            a.as_mut_ptr(),
            &ni,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &(lwork as i32),
            iwork.as_mut_ptr(),
            &(liwork as i32),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::ConvergenceFailure { info });
    }
    // LAPACK wrote eigenvectors column-major: column j lives in a[j*n..(j+1)*n].
    let vectors = Array2::from_shape_fn((n, n), |(r, c)| a[c * n + r]);
    Ok((Array1::from_vec(w), vectors))
}

/// The `count` smallest eigenvalues (respecting multiplicity) of a symmetric
/// matrix, with orthonormal eigenvectors. Within a degenerate eigenspace any
/// orthonormal basis may be returned.
pub fn smallest_eigenpairs(s: &Array2<f64>, count: usize) -> Result<EigenPairs> {
    let n = require_square(s)?;
    if count < 1 || count > n {
        return Err(Error::InvalidK { k: count, max: n });
    }
    let sym = symmetrize_checked(s)?;
    let (values, vectors) = sym_eig_all(&sym)?;
    Ok(EigenPairs {
        values: values.slice(ndarray::s![..count]).to_owned(),
        vectors: vectors.slice(ndarray::s![.., ..count]).to_owned(),
    })
}

/// Orthonormal basis of the nullspace of `a` (p x n), as an n x (n - rank)
/// matrix. Rank is the number of singular values above
/// [`RANK_REL_TOL`] * sigma_max.
pub fn nullspace_basis(a: &Array2<f64>) -> Result<Array2<f64>> {
    let (p, n) = a.dim();
    if n == 0 {
        return Ok(Array2::zeros((0, 0)));
    }
    if p == 0 {
        return Ok(Array2::eye(n));
    }
    // The row-major p x n buffer of `a` is the column-major buffer of a^T, so
    // feed LAPACK the n x p matrix a^T. Its left singular vectors are the
    // right singular vectors of `a`.
    let buf = if a.is_standard_layout() {
        a.as_slice().unwrap().to_vec()
    } else {
        a.iter().copied().collect()
    };
    let (s, u) = svd_full_left(buf, n, p)?;
    let smax = s.first().copied().unwrap_or(0.0);
    let rank = s.iter().filter(|&&sv| sv > RANK_REL_TOL * smax).count();
    let cols = n - rank;
    let z = Array2::from_shape_fn((n, cols), |(r, c)| u[(rank + c) * n + r]);
    Ok(z)
}

/// dgesdd on a column-major m x n buffer; returns the singular values
/// (descending) and the full m x m left singular vector matrix, column-major.
fn svd_full_left(mut a: Vec<f64>, m: usize, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mi = m as i32;
    let ni = n as i32;
    let min_mn = m.min(n);
    let mut s = vec![0.0f64; min_mn];
    let mut u = vec![0.0f64; m * m];
    let mut vt = vec![0.0f64; n * n];
    let mut iwork = vec![0i32; 8 * min_mn.max(1)];
    let mut info = 0i32;

    let mut work_query = [0.0f64; 1];
    unsafe {
        lapack_sys::dgesdd_(
            &(b'A' as i8),
            &mi,
            &ni,
            a.as_mut_ptr(),
            &mi,
            s.as_mut_ptr(),
            u.as_mut_ptr(),
            &mi,
            vt.as_mut_ptr(),
            &ni,
            work_query.as_mut_ptr(),
            &(-1),
            iwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::ConvergenceFailure { info });
    }
    let lwork = work_query[0] as usize;
    let mut work = vec![0.0f64; lwork.max(1)];
    unsafe {
        lapack_sys::dgesdd_(
            &(b'A' as i8),
            &mi,
            &ni,
            a.as_mut_ptr(),
            &mi,
            s.as_mut_ptr(),
            u.as_mut_ptr(),
            &mi,
            vt.as_mut_ptr(),
            &ni,
            work.as_mut_ptr(),
            &(lwork as i32),
            iwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(Error::ConvergenceFailure { info });
    }
    Ok((s, u))
}

fn scale_columns(v: &Array2<f64>, scales: &Array1<f64>) -> Array2<f64> {
    let mut out = v.clone();
    for (mut col, &s) in out.columns_mut().into_iter().zip(scales.iter()) {
        col.mapv_inplace(|x| x * s);
    }
    out
}

fn force_symmetric(m: &mut Array2<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (m[[i, j]] + m[[j, i]]);
            m[[i, j]] = avg;
            m[[j, i]] = avg;
        }
    }
}

/// Positive definite square root Q of an SPD matrix (Q Q = M) together with
/// Q^{-1}, both via the spectral decomposition.
///
/// Fails with `NotPositiveDefinite` when the smallest eigenvalue is at or
/// below 1e-10 * trace(M) / m.
pub fn spd_sqrt_inv(m: &Array2<f64>) -> Result<(Array2<f64>, Array2<f64>)> {
    let dim = require_square(m)?;
    let sym = symmetrize_checked(m)?;
    let (values, vectors) = sym_eig_all(&sym)?;
    let trace: f64 = (0..dim).map(|i| sym[[i, i]]).sum();
    let eps_pd = 1e-10 * trace / dim as f64;
    let min_eigenvalue = values[0];
    if min_eigenvalue <= eps_pd {
        return Err(Error::NotPositiveDefinite { min_eigenvalue });
    }
    let sqrt_vals = values.mapv(f64::sqrt);
    let inv_sqrt_vals = values.mapv(|v| 1.0 / v.sqrt());
    let mut q = scale_columns(&vectors, &sqrt_vals).dot(&vectors.t());
    let mut q_inv = scale_columns(&vectors, &inv_sqrt_vals).dot(&vectors.t());
    force_symmetric(&mut q);
    force_symmetric(&mut q_inv);
    Ok((q, q_inv))
}
