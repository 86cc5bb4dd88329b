//! Tridiagonal solves.

use crate::error::{Error, Result};

/// Solves `lower[i] x[i−1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`
/// (Thomas algorithm). `lower[0]` and `upper[N−1]` are ignored.
pub fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if lower.len() != n || upper.len() != n || rhs.len() != n || n == 0 {
        return Err(Error::Domain("tridiagonal bands have mismatched lengths".into()));
    }
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    for i in 0..n {
        if i > 0 {
            pivot = diag[i] - lower[i] * c[i - 1];
        }
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::Domain(format!("singular tridiagonal system at row {i}")));
        }
        c[i] = if i + 1 < n { upper[i] / pivot } else { 0.0 };
        d[i] = if i == 0 { rhs[0] / pivot } else { (rhs[i] - lower[i] * d[i - 1]) / pivot };
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}
