use nalgebra::SymmetricEigen;

use super::GrassmannPoint;
use crate::error::{Error, Result};
use crate::Matrix;

/// Top-`k` eigenpairs of a symmetric matrix, eigenvalues descending.
///
/// Each eigenvector's largest-magnitude entry is made positive so the
/// result is deterministic.
pub fn dominant_eigenpairs(m: &Matrix, k: usize) -> Result<(GrassmannPoint, Vec<f64>)> {
    let n = m.nrows();
    if !m.is_square() {
        return Err(Error::shape("square matrix", format!("{}×{}", n, m.ncols())));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("k = {k} must lie in [1, {n}]")));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite matrix entry".into()));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("symmetric eigensolver did not converge".into()))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut basis = Matrix::zeros(n, k);
    let mut values = Vec::with_capacity(k);
    for (c, &idx) in order.iter().take(k).enumerate() {
        let mut v = eig.eigenvectors.column(idx).into_owned();
        let pivot = v.iamax();
        if v[pivot] < 0.0 {
            v.neg_mut();
        }
        basis.set_column(c, &v);
        values.push(eig.eigenvalues[idx]);
    }
    // eigenvectors from the solver are orthonormal to round-off; clean up with QR
    let point = match GrassmannPoint::from_orthonormal(basis.clone()) {
        Ok(p) => p,
        Err(_) => GrassmannPoint::orthonormalize(&basis)?,
    };
    Ok((point, values))
}

/// Orthonormal basis of the eigenvectors for the `k` largest eigenvalues.
pub fn dominant_subspace(m: &Matrix, k: usize) -> Result<GrassmannPoint> {
    dominant_eigenpairs(m, k).map(|(p, _)| p)
}

/// Principal angles between two subspaces, ascending, in `[0, π/2]`.
///
/// Uses the cosines (singular values of `XᵀY`) for large angles and the
/// sines (singular values of `(I − XXᵀ)Y`) for small ones, where arccos
/// loses half the digits.
pub fn principal_angles(x: &GrassmannPoint, y: &GrassmannPoint) -> Result<Vec<f64>> {
    if x.as_matrix().shape() != y.as_matrix().shape() {
        return Err(Error::shape(
            format!("{}×{}", x.n(), x.k()),
            format!("{}×{}", y.n(), y.k()),
        ));
    }
    let xm = x.as_matrix();
    let ym = y.as_matrix();
    let cross = xm.transpose() * ym;

    let mut cos: Vec<f64> = cross
        .clone()
        .svd(false, false)
        .singular_values
        .iter()
        .map(|s| s.clamp(-1.0, 1.0))
        .collect();
    cos.sort_by(|a, b| b.total_cmp(a));

    let residual = ym - xm * cross;
    let mut sin: Vec<f64> = residual
        .svd(false, false)
        .singular_values
        .iter()
        .map(|s| s.clamp(0.0, 1.0))
        .collect();
    sin.sort_by(|a, b| a.total_cmp(b));

    let k = x.k();
    Ok((0..k)
        .map(|i| {
            let s = sin.get(i).copied().unwrap_or(0.0);
            if cos[i] * cos[i] >= 0.5 {
                s.asin()
            } else {
                cos[i].acos()
            }
        })
        .collect())
}
