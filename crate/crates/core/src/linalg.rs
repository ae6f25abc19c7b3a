//! Small dense complex linear algebra helpers shared by the modules.

use nalgebra::DMatrix;
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(size: usize) -> CMatrix {
    CMatrix::identity(size, size)
}

pub fn zeros(rows: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(rows, cols)
}

/// Spectral norm (largest singular value).
pub fn op_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    a.singular_values().max()
}

/// Largest entry modulus.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// ‖A·A − A‖ for a candidate projector.
pub fn idempotency_residual(a: &CMatrix) -> f64 {
    op_norm(&(a * a - a))
}

/// ‖A − A†‖.
pub fn hermiticity_residual(a: &CMatrix) -> f64 {
    op_norm(&(a - a.adjoint()))
}

/// Numerical rank: singular values above `tol` times the largest one.
pub fn rank(a: &CMatrix, tol: f64) -> usize {
    let sv = a.singular_values();
    let top = sv.max();
    if top == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * top).count()
}

pub fn trace(a: &CMatrix) -> C64 {
    a.diagonal().sum()
}
