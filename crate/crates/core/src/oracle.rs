//! Dense reference computations used to check network outputs.

use nalgebra::DMatrix;

use crate::error::{mismatch, Error, Result};

pub fn dense_product(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.ncols() != b.nrows() {
        return Err(mismatch(format!("{}x{} times {}x{}", a.nrows(), a.ncols(), b.nrows(), b.ncols())));
    }
    Ok(a * b)
}

/// `A^{2^j}` by `j` successive squarings.
pub fn repeated_squaring(a: &DMatrix<f64>, j: usize) -> DMatrix<f64> {
    let mut p = a.clone();
    for _ in 0..j {
        p = &p * &p;
    }
    p
}

/// `∏_{i<l} (A^{2^i} + I)`, the factored form of the Neumann partial sum.
pub fn neumann_factored(a: &DMatrix<f64>, l: usize) -> DMatrix<f64> {
    let n = a.nrows();
    let id = DMatrix::<f64>::identity(n, n);
    let mut power = a.clone();
    let mut prod = &power + &id;
    for _ in 1..l {
        power = &power * &power;
        prod = &prod * (&power + &id);
    }
    prod
}

/// `(I − A)⁻¹` by LU factorization.
pub fn shifted_inverse(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    (DMatrix::identity(n, n) - a).lu().try_inverse().ok_or_else(|| Error::SingularSystem("I - A is singular".into()))
}

/// Largest singular value from a full SVD.
pub fn svd_norm(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().max()
}

/// `‖x − y‖₂ / max(‖y‖₂, floor)` for flat vectors.
pub fn relative_error(x: &[f64], y: &[f64], floor: f64) -> f64 {
    assert_eq!(x.len(), y.len(), "relative_error on vectors of different length");
    let diff: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let norm: f64 = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    diff / norm.max(floor)
}
