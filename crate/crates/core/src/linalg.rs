//! Dense helpers shared by the solver and the sanitizers.

use std::f64::consts::SQRT_2;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::graph::SymMatrix;

/// Length of the embedded vector of an `n×n` symmetric matrix.
pub fn svec_len(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Lower-triangle, column-major embedding with `√2` on off-diagonal
/// entries, so the Euclidean inner product of embeddings equals the trace
/// inner product of the matrices.
pub fn svec(m: &SymMatrix, out: &mut [f64]) {
    let n = m.nrows();
    debug_assert_eq!(out.len(), svec_len(n));
    let mut k = 0;
    for j in 0..n {
        out[k] = m[(j, j)];
        k += 1;
        for i in j + 1..n {
            out[k] = SQRT_2 * 0.5 * (m[(i, j)] + m[(j, i)]);
            k += 1;
        }
    }
}

pub fn unsvec(v: &[f64], n: usize) -> SymMatrix {
    debug_assert_eq!(v.len(), svec_len(n));
    let mut m = SymMatrix::zeros(n, n);
    let mut k = 0;
    for j in 0..n {
        m[(j, j)] = v[k];
        k += 1;
        for i in j + 1..n {
            let x = v[k] / SQRT_2;
            m[(i, j)] = x;
            m[(j, i)] = x;
            k += 1;
        }
    }
    m
}

/// Index of entry `(i, j)` (any order) inside the embedding of an `n×n` matrix.
pub fn svec_index(n: usize, i: usize, j: usize) -> usize {
    let (r, c) = if i >= j { (i, j) } else { (j, i) };
    let column_start = c * n - c * c.saturating_sub(1) / 2;
    column_start + (r - c)
}

/// Symmetric eigendecomposition with eigenvalues in ascending order.
pub fn sym_eigen(m: &SymMatrix) -> (DVector<f64>, DMatrix<f64>) {
    let sym = symmetrize(m);
    let eig = SymmetricEigen::new(sym);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&i| eig.eigenvalues[i]));
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn min_eigenvalue(m: &SymMatrix) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    sym_eigen(m).0[0]
}

pub fn symmetrize(m: &SymMatrix) -> SymMatrix {
    (m + m.transpose()) * 0.5
}

/// Euclidean projection onto the PSD cone.
pub fn project_psd(m: &SymMatrix) -> SymMatrix {
    let n = m.nrows();
    if n == 0 {
        return m.clone();
    }
    let eig = SymmetricEigen::new(symmetrize(m));
    let keep: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] > 0.0).collect();
    if keep.is_empty() {
        return SymMatrix::zeros(n, n);
    }
    let mut half = DMatrix::zeros(n, keep.len());
    for (dst, &k) in keep.iter().enumerate() {
        let scale = eig.eigenvalues[k].sqrt();
        half.set_column(dst, &(eig.eigenvectors.column(k) * scale));
    }
    let out = &half * half.transpose();
    symmetrize(&out)
}

/// Upper-triangular `B` with `BᵀB = M`, by the unpivoted outer-product
/// algorithm.
///
/// A negative pivot fails. A zero pivot is accepted only when the rest of
/// its column is exactly zero, in which case the row of `B` is zero.
pub fn cholesky_upper(m: &SymMatrix) -> Option<DMatrix<f64>> {
    let n = m.nrows();
    let mut a = m.clone();
    let mut b = DMatrix::zeros(n, n);
    for k in 0..n {
        let pivot = a[(k, k)];
        if pivot.is_nan() || pivot < 0.0 {
            return None;
        }
        if pivot == 0.0 {
            if (k + 1..n).any(|j| a[(k, j)] != 0.0) {
                return None;
            }
            continue;
        }
        let d = pivot.sqrt();
        b[(k, k)] = d;
        for j in k + 1..n {
            b[(k, j)] = a[(k, j)] / d;
        }
        for i in k + 1..n {
            let bki = b[(k, i)];
            if bki == 0.0 {
                continue;
            }
            for j in i..n {
                let v = a[(i, j)] - bki * b[(k, j)];
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
    }
    Some(b)
}

pub fn frobenius(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn norm_inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn svec_preserves_inner_product() {
        let a = SymMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 5.0, 3.0, 5.0, 6.0]);
        let b = SymMatrix::from_row_slice(3, 3, &[0.5, -1.0, 0.0, -1.0, 2.0, 1.5, 0.0, 1.5, -3.0]);
        let mut va = vec![0.0; 6];
        let mut vb = vec![0.0; 6];
        svec(&a, &mut va);
        svec(&b, &mut vb);
        let trace = (&a * &b).trace();
        assert!((dot(&va, &vb) - trace).abs() < 1e-12);
        let back = unsvec(&va, 3);
        assert!((back - a).abs().max() < 1e-14);
    }

    #[test]
    fn svec_index_matches_layout() {
        let n = 4;
        let m = SymMatrix::from_fn(n, n, |i, j| (10 * i.max(j) + i.min(j)) as f64);
        let mut v = vec![0.0; svec_len(n)];
        svec(&m, &mut v);
        for i in 0..n {
            for j in 0..n {
                let scale = if i == j { 1.0 } else { SQRT_2 };
                assert!((v[svec_index(n, i, j)] - scale * m[(i, j)]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn psd_projection_clamps_negative_part() {
        let m = SymMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let p = project_psd(&m);
        let expected = SymMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.5, 0.5]);
        assert!((p - expected).abs().max() < 1e-14);
    }

    #[test]
    fn cholesky_factors_and_fails() {
        let m = SymMatrix::from_row_slice(3, 3, &[4.0, 2.0, 0.0, 2.0, 5.0, 1.0, 0.0, 1.0, 3.0]);
        let b = cholesky_upper(&m).unwrap();
        assert!((b.transpose() * &b - &m).abs().max() < 1e-14);
        assert_eq!(b[(1, 0)], 0.0);
        let indefinite = SymMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(cholesky_upper(&indefinite).is_none());
        let singular = SymMatrix::from_row_slice(2, 2, &[0.25, 0.25, 0.25, 0.25]);
        let b = cholesky_upper(&singular).unwrap();
        assert_eq!(b.transpose() * &b, singular);
        let bad_zero = SymMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 1.0]);
        assert!(cholesky_upper(&bad_zero).is_none());
    }

    #[test]
    fn eigenvalues_sorted() {
        let m = SymMatrix::from_row_slice(2, 2, &[0.25, 0.25, 0.25, 0.25]);
        let (vals, _) = sym_eigen(&m);
        assert!(vals[0] <= vals[1]);
        assert!((vals[1] - 0.5).abs() < 1e-15);
    }
}
