//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, Dyn, SVD};

use crate::error::{Error, Result};

/// `A_{o,o} = P_o A P_oᵀ`.
pub fn restrict(a: &DMatrix<f64>, pattern: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(pattern.len(), pattern.len(), |i, j| a[(pattern[i], pattern[j])])
}

/// `P_o A`: the rows of `a` listed in `pattern`.
pub fn select_rows(a: &DMatrix<f64>, pattern: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(pattern.len(), a.ncols(), |i, j| a[(pattern[i], j)])
}

/// `A P_oᵀ`: the columns of `a` listed in `pattern`.
pub fn select_cols(a: &DMatrix<f64>, pattern: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), pattern.len(), |i, j| a[(i, pattern[j])])
}

pub fn select_entries(v: &DVector<f64>, pattern: &[usize]) -> DVector<f64> {
    DVector::from_iterator(pattern.len(), pattern.iter().map(|&i| v[i]))
}

pub fn svd(a: &DMatrix<f64>, compute_u: bool, compute_v: bool) -> SVD<f64, Dyn, Dyn> {
    a.clone().svd(compute_u, compute_v)
}

/// Singular values in decreasing order. Empty for a degenerate shape.
pub fn singular_values(a: &DMatrix<f64>) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = svd(a, false, false).singular_values.iter().copied().collect();
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// Rank threshold `max(rows, cols) · ε · σ_max`.
pub fn rank_threshold(sv: &[f64], rows: usize, cols: usize) -> f64 {
    let smax = sv.first().copied().unwrap_or(0.0);
    rows.max(cols) as f64 * f64::EPSILON * smax
}

pub fn numerical_rank(a: &DMatrix<f64>) -> usize {
    let sv = singular_values(a);
    let tol = rank_threshold(&sv, a.nrows(), a.ncols());
    sv.iter().filter(|&&s| s > tol).count()
}

/// Moore–Penrose pseudo-inverse dropping singular values below
/// `rel_tol · σ_max`.
pub fn pinv_relative(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return DMatrix::zeros(n, m);
    }
    let svd = svd(a, true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.iter().fold(0.0f64, |acc, &s| acc.max(s));
    let cutoff = rel_tol * smax;
    let mut out = DMatrix::zeros(n, m);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > cutoff && s > 0.0 {
            out += (vt.row(k).transpose() * u.column(k).transpose()) / s;
        }
    }
    out
}

/// Orthonormal basis of the column space, one column per numerically
/// non-zero singular value.
pub fn column_space(a: &DMatrix<f64>) -> DMatrix<f64> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return DMatrix::zeros(m, 0);
    }
    let svd = svd(a, true, false);
    let u = svd.u.expect("u requested");
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let smax = sv.iter().fold(0.0f64, |acc, &s| acc.max(s));
    let tol = m.max(n) as f64 * f64::EPSILON * smax;
    let keep: Vec<usize> = (0..sv.len()).filter(|&k| sv[k] > tol).collect();
    DMatrix::from_fn(m, keep.len(), |i, j| u[(i, keep[j])])
}

/// Pseudo-inverse of a symmetric matrix through its eigendecomposition,
/// dropping eigenvalues with `|λ| ≤ rel_tol · max|λ|`. The SVD path can
/// misplace a singular value by ~1e-4 when several of them equal 1, which
/// restricted orthogonal projections hit routinely.
pub fn pinv_symmetric(a: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let n = a.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let eig = a.clone().symmetric_eigen();
    let lmax = eig.eigenvalues.amax();
    let cutoff = rel_tol * lmax;
    let mut out = DMatrix::zeros(n, n);
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l.abs() > cutoff && l != 0.0 {
            let v = eig.eigenvectors.column(k);
            out += (&v * v.transpose()) / l;
        }
    }
    out
}

/// Eigenvector basis of the range of a symmetric matrix, threshold
/// `n · ε · max|λ|`.
pub fn column_space_symmetric(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let eig = a.clone().symmetric_eigen();
    let tol = n as f64 * f64::EPSILON * eig.eigenvalues.amax();
    let keep: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k].abs() > tol).collect();
    DMatrix::from_fn(n, keep.len(), |i, j| eig.eigenvectors[(i, keep[j])])
}

pub fn numerical_rank_symmetric(a: &DMatrix<f64>) -> usize {
    column_space_symmetric(a).ncols()
}

/// Spectral distance `‖P_A − P_B‖₂` between the spans of two orthonormal
/// bases of the same ambient space. Spans of different dimension are at
/// distance 1.
pub fn subspace_gap(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    if a.ncols() != b.ncols() {
        return 1.0;
    }
    if a.ncols() == 0 {
        return 0.0;
    }
    let diff = a * a.transpose() - b * b.transpose();
    diff.symmetric_eigenvalues().amax()
}

/// Modified Gram–Schmidt with one reorthogonalization pass. Fails if the
/// columns are numerically dependent.
pub fn orthonormalize(columns: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (d, r) = columns.shape();
    let mut q = DMatrix::<f64>::zeros(d, r);
    for k in 0..r {
        let mut v: DVector<f64> = columns.column(k).into_owned();
        let original = v.norm();
        if original == 0.0 {
            return Err(Error::param(format!("basis column {k} is zero")));
        }
        for _pass in 0..2 {
            for j in 0..k {
                let qj = q.column(j);
                let proj = qj.dot(&v);
                v.axpy(-proj, &qj, 1.0);
            }
        }
        let norm = v.norm();
        if norm <= 1e-10 * original {
            return Err(Error::param(format!(
                "basis column {k} is linearly dependent on the previous ones"
            )));
        }
        q.set_column(k, &(v / norm));
    }
    Ok(q)
}

/// Largest absolute entry of `a·a − a`.
pub fn idempotency_defect(a: &DMatrix<f64>) -> f64 {
    (a * a - a).amax()
}

/// Smallest eigenvalue of a symmetric matrix above `rel_tol · λ_max`.
pub fn min_positive_eigenvalue(sym: &DMatrix<f64>, rel_tol: f64) -> Option<f64> {
    if sym.nrows() == 0 {
        return None;
    }
    let eig = sym.clone().symmetric_eigenvalues();
    let lmax = eig.iter().fold(0.0f64, |acc, &e| acc.max(e));
    let cutoff = rel_tol * lmax;
    eig.iter()
        .copied()
        .filter(|&e| e > cutoff && e > 0.0)
        .fold(None, |acc: Option<f64>, e| Some(acc.map_or(e, |a| a.min(e))))
}
