//! Dense helpers shared by the evolution, Floquet and ensemble code.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::C64;

/// `a * b` for real `a` and complex `b`, done as two real products.
pub(crate) fn real_mul_complex(a: &DMatrix<f64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let re = b.map(|z| z.re);
    let im = b.map(|z| z.im);
    let pr = a * re;
    let pi = a * im;
    pr.zip_map(&pi, C64::new)
}

/// `aᵀ * b` for real `a` and complex `b`.
pub(crate) fn real_tr_mul_complex(a: &DMatrix<f64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let re = b.map(|z| z.re);
    let im = b.map(|z| z.im);
    let pr = a.tr_mul(&re);
    let pi = a.tr_mul(&im);
    pr.zip_map(&pi, C64::new)
}

/// Max-norm of `u† u − I`.
pub(crate) fn isometry_defect(u: &DMatrix<C64>) -> f64 {
    let gram = u.ad_mul(u);
    let mut worst = 0.0f64;
    for j in 0..gram.ncols() {
        for i in 0..gram.nrows() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Orthonormalize the columns of `a` by QR, with the phases of the triangular
/// factor's diagonal absorbed so that it is real and positive.
pub(crate) fn qr_positive(a: DMatrix<C64>) -> DMatrix<C64> {
    let qr = a.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..q.ncols() {
        let d = r[(j, j)];
        let norm = d.norm();
        if norm > 0.0 {
            let phase = d / norm;
            for i in 0..q.nrows() {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub(crate) fn hermitian_eigenvalues(m: DMatrix<C64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut vals: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(f64::total_cmp);
    vals
}

/// Real symmetric eigendecomposition with ascending eigenvalues and a fixed
/// sign convention: the first entry of magnitude above `1e-10` is positive.
pub(crate) fn sorted_symmetric_eigen(h: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = h.nrows();
    let eig = SymmetricEigen::new(h.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = DMatrix::<f64>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let flip = col
            .iter()
            .find(|x| x.abs() > 1e-10)
            .map_or(false, |&x| x < 0.0);
        let sign = if flip { -1.0 } else { 1.0 };
        vectors.column_mut(dst).copy_from(&(col * sign));
    }
    (values, vectors)
}
