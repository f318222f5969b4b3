//! Small dense helpers on top of nalgebra.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn binom(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
/// Only the Hermitian part of `m` is used.
pub fn herm_eig(m: &CMat) -> (Vec<f64>, CMat) {
    let h = hermitian_part(m);
    let n = h.nrows();
    if n == 0 {
        return (vec![], CMat::zeros(0, 0));
    }
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(n, n, |r, col| eig.eigenvectors[(r, order[col])]);
    (vals, vecs)
}

pub fn herm_min_eig(m: &CMat) -> f64 {
    herm_eig(m).0.first().copied().unwrap_or(f64::INFINITY)
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn hermitian_defect(m: &CMat) -> f64 {
    (m - m.adjoint()).norm()
}

pub fn inverse(m: &CMat) -> Result<CMat> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::InvalidArgument("singular matrix".into()))
}

/// Largest singular value.
pub fn op_norm(m: &CMat) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    let g = m.adjoint() * m;
    herm_eig(&g).0.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Upper-triangular `c` with `g = c^H c`.
pub fn cholesky_upper(g: &CMat) -> Result<CMat> {
    if herm_min_eig(g) <= 0.0 {
        return Err(Error::InvalidArgument("matrix is not positive definite".into()));
    }
    let ch = nalgebra::Cholesky::new(hermitian_part(g))
        .ok_or_else(|| Error::InvalidArgument("matrix is not positive definite".into()))?;
    Ok(ch.l().adjoint())
}

/// Orthonormal basis (columns) of the column span, dropping directions whose
/// norm falls below `tol` after Gram-Schmidt against the earlier ones.
pub fn orthonormal_columns(m: &CMat, tol: f64) -> CMat {
    let mut cols: Vec<nalgebra::DVector<C64>> = Vec::new();
    for j in 0..m.ncols() {
        let mut v = m.column(j).clone_owned();
        for _ in 0..2 {
            for q in &cols {
                let p = q.dotc(&v);
                v -= q * p;
            }
        }
        let nv = v.norm();
        if nv > tol {
            cols.push(v / C64::from(nv));
        }
    }
    if cols.is_empty() {
        return CMat::zeros(m.nrows(), 0);
    }
    CMat::from_columns(&cols)
}

/// Kernel of a square pointwise operator as orthonormal columns.
pub fn kernel_basis(m: &CMat, tol: f64) -> CMat {
    let g = m.adjoint() * m;
    let (vals, vecs) = herm_eig(&g);
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i] <= tol).collect();
    CMat::from_fn(m.ncols(), keep.len(), |r, c| vecs[(r, keep[c])])
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}
