//! Small dense linear-algebra helpers: matrix exponential, pseudo-inverse,
//! and eigenvalue utilities used by the Gaussian machinery.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};

/// Matrix exponential by scaling-and-squaring with a truncated power series.
///
/// The argument is scaled by 2^-s until its infinity norm is at most 1/2, the
/// series is summed until terms fall below 1e-16 of the running sum, and the
/// result is squared s times. For the 6x6 generators used here the series
/// converges in ~20 terms.
pub fn expm(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: a.ncols(),
        });
    }
    let norm = inf_norm(a);
    if !norm.is_finite() {
        return Err(Error::NumericalDomain(format!(
            "matrix exponential of a non-finite matrix (norm {norm})"
        )));
    }
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a / 2f64.powi(squarings as i32);

    let mut term = DMatrix::<f64>::identity(n, n);
    let mut sum = DMatrix::<f64>::identity(n, n);
    let mut converged = false;
    for k in 1..=60 {
        term = (&term * &scaled) / k as f64;
        sum += &term;
        if inf_norm(&term) <= 1e-16 * inf_norm(&sum) {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NumericalDomain(format!(
            "matrix exponential series did not converge (input norm {norm:.3e})"
        )));
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    Ok(sum)
}

/// Moore-Penrose pseudo-inverse of a symmetric matrix via eigendecomposition.
/// Eigenvalues below `rel_cutoff` times the largest magnitude are treated as zero.
pub fn pinv_symmetric(m: &DMatrix<f64>, rel_cutoff: f64) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let max_abs = eig.eigenvalues.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    let cutoff = rel_cutoff * max_abs;
    let n = m.nrows();
    let mut out = DMatrix::<f64>::zeros(n, n);
    for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda.abs() > cutoff && cutoff > 0.0 || (cutoff == 0.0 && lambda.abs() > 0.0) {
            let v = eig.eigenvectors.column(k);
            out += (&v * v.transpose()) / lambda;
        }
    }
    out
}

/// Smallest eigenvalue of a real symmetric matrix.
pub fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let eig = SymmetricEigen::new(m.clone());
    eig.eigenvalues.iter().fold(f64::INFINITY, |acc, &v| acc.min(v))
}

/// Moduli of the (complex) eigenvalues of a real matrix, sorted ascending.
pub fn eigenvalue_moduli(m: &DMatrix<f64>) -> Vec<f64> {
    let eigs = m.clone().complex_eigenvalues();
    let mut out: Vec<f64> = eigs.iter().map(|z| z.norm()).collect();
    out.sort_by(|x, y| x.partial_cmp(y).unwrap());
    out
}

/// Max absolute entry.
pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.abs()))
}

/// Max absolute entrywise difference.
pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    max_abs(&(a - b))
}

fn inf_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)].abs()).sum::<f64>())
        .fold(0.0f64, f64::max)
}
