//! Dense complex matrices standing in for truncated operators.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{CoreError, Result};

/// A truncated operator: dense complex square matrix on the ambient space.
pub type Operator = DMatrix<Complex64>;

pub fn identity(dim: usize) -> Operator {
    Operator::identity(dim, dim)
}

pub fn zeros(dim: usize) -> Operator {
    Operator::zeros(dim, dim)
}

/// Conjugate transpose.
pub fn dagger(x: &Operator) -> Operator {
    x.adjoint()
}

/// Max entrywise deviation from the conjugate transpose.
pub fn hermiticity_defect(x: &Operator) -> f64 {
    let adj = x.adjoint();
    x.iter()
        .zip(adj.iter())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max)
}

/// Largest entry modulus.
pub fn max_abs(x: &Operator) -> f64 {
    x.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn check_square_match(a: &Operator, b: &Operator) -> Result<()> {
    if a.nrows() != b.nrows() || a.ncols() != b.ncols() {
        return Err(CoreError::DimMismatch {
            left: a.nrows(),
            right: b.nrows(),
        });
    }
    Ok(())
}

/// Scale rows of `x` by the real diagonal `d` (i.e. form diag(d) * x) in place.
pub fn scale_rows(x: &mut Operator, d: &[f64]) {
    for (i, &w) in d.iter().enumerate() {
        for j in 0..x.ncols() {
            x[(i, j)] *= w;
        }
    }
}

/// Scale columns of `x` by the real diagonal `d` (i.e. form x * diag(d)) in place.
pub fn scale_cols(x: &mut Operator, d: &[f64]) {
    for (j, &w) in d.iter().enumerate() {
        for i in 0..x.nrows() {
            x[(i, j)] *= w;
        }
    }
}

/// diag(left) * x * diag(right) without building the diagonal factors.
pub fn sandwich_diag(left: &[f64], x: &Operator, right: &[f64]) -> Operator {
    let mut out = x.clone();
    scale_rows(&mut out, left);
    scale_cols(&mut out, right);
    out
}
