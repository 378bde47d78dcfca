//! Cyclic Jacobi eigendecomposition for small dense symmetric matrices.
//!
//! The cross-product matrices handled here are tiny (the document side of
//! the table, or a seriation Laplacian), so plain Jacobi rotations are
//! accurate and deterministic: the sweep order is fixed, hence repeated
//! runs produce bit-identical output.

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Square root of the sum of squared strictly-upper-triangle entries.
fn off_diagonal_norm(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    let mut sum = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            sum += a[p][q] * a[p][q];
        }
    }
    sum.sqrt()
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi sweeps.
///
/// Returns `(eigenvalues, eigenvectors)` where `eigenvectors[k]` is the
/// unit eigenvector paired with `eigenvalues[k]`, in no particular order.
/// Iterates until the off-diagonal norm drops below `tol`.
pub(crate) fn eigen_symmetric(matrix: &[Vec<f64>], tol: f64) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = matrix.len();
    let mut a: Vec<Vec<f64>> = matrix.to_vec();
    debug_assert!(a.iter().all(|row| row.len() == n));
    // v[i][k]: component i of eigenvector k.
    let mut v = vec![vec![0.0; n]; n];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }

    if n < 2 {
        return Ok((a.iter().enumerate().map(|(i, r)| r[i]).collect(), v));
    }

    let mut sweeps = 0;
    while off_diagonal_norm(&a) >= tol {
        if sweeps >= MAX_SWEEPS {
            return Err(Error::ConvergenceFailure {
                sweeps,
                off: off_diagonal_norm(&a),
            });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vp = row[p];
                    let vq = row[q];
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }

    let eigenvalues: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    let eigenvectors: Vec<Vec<f64>> = (0..n).map(|k| (0..n).map(|i| v[i][k]).collect()).collect();
    Ok((eigenvalues, eigenvectors))
}
