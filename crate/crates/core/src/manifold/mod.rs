//! Geometry of the Grassmann manifold 𝒢(k, n) and a Riemannian trust-region
//! maximizer for quadratic trace objectives `f(X) = tr(XᵀMX)`.
//!
//! Points are stored as `n × k` column-orthonormal representatives; two
//! representatives related by `X ↦ XQ` with `Q` orthogonal are the same
//! point. Tangent vectors at `X` are the `n × k` matrices `ξ` with `Xᵀξ = 0`,
//! using the Frobenius inner product.

mod eigen;
mod trust_region;

pub use eigen::{dominant_eigenpairs, dominant_subspace, principal_angles};
pub use trust_region::{
    riemannian_grad, riemannian_hess_apply, rtr_maximize, truncated_cg, QuadraticTraceObjective,
    RtrOutcome, RtrStatus, TcgOutcome, TcgStop, TrustRegionConfig,
};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::Matrix;

/// Orthonormality tolerance for accepting a representative.
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// Column-orthonormal `n × k` representative of a point on 𝒢(k, n).
#[derive(Debug, Clone, PartialEq)]
pub struct GrassmannPoint(Matrix);

impl GrassmannPoint {
    /// Wraps `x` after checking `XᵀX = I` within [`ORTHONORMAL_TOL`].
    pub fn from_orthonormal(x: Matrix) -> Result<Self> {
        let (n, k) = x.shape();
        if k == 0 || k > n {
            return Err(Error::shape("n × k with 1 ≤ k ≤ n", format!("{n}×{k}")));
        }
        let err = (x.transpose() * &x - Matrix::identity(k, k)).amax();
        if !(err <= ORTHONORMAL_TOL) {
            return Err(Error::InvalidArgument(format!(
                "columns are not orthonormal (max deviation {err:.3e})"
            )));
        }
        Ok(Self(x))
    }

    /// Orthonormal basis of the column span of `x` (thin QR, `diag(R) > 0`).
    pub fn orthonormalize(x: &Matrix) -> Result<Self> {
        let (n, k) = x.shape();
        if k == 0 || k > n {
            return Err(Error::shape("n × k with 1 ≤ k ≤ n", format!("{n}×{k}")));
        }
        Ok(Self(qr_positive(x)?))
    }

    /// Uniformly distributed random point (QR of a Gaussian matrix).
    pub fn random<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Self> {
        let g = Matrix::from_fn(n, k, |_, _| rng.sample(StandardNormal));
        Self::orthonormalize(&g)
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn k(&self) -> usize {
        self.0.ncols()
    }

    /// Another representative `XQ` of the same subspace.
    pub fn rotated(&self, q: &Matrix) -> Result<Self> {
        Self::from_orthonormal(&self.0 * q)
    }

    /// Orthogonal projector `XXᵀ`.
    pub fn projector(&self) -> Matrix {
        &self.0 * self.0.transpose()
    }

    /// `‖XᵀX − I‖_max`.
    pub fn orthonormality_error(&self) -> f64 {
        let k = self.k();
        (self.0.transpose() * &self.0 - Matrix::identity(k, k)).amax()
    }

    fn check_shape(&self, m: &Matrix) -> Result<()> {
        if m.shape() != self.0.shape() {
            return Err(Error::shape(
                format!("{}×{}", self.n(), self.k()),
                format!("{}×{}", m.nrows(), m.ncols()),
            ));
        }
        Ok(())
    }
}

/// Tangent vector `ξ` at some base point `X`, `Xᵀξ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector(Matrix);

impl TangentVector {
    pub fn zeros(n: usize, k: usize) -> Self {
        Self(Matrix::zeros(n, k))
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn norm(&self) -> f64 {
        self.0.norm()
    }

    /// Frobenius inner product.
    pub fn inner(&self, other: &TangentVector) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn scaled(&self, s: f64) -> TangentVector {
        TangentVector(&self.0 * s)
    }
}

/// `P_X(Z) = (I − XXᵀ) Z`.
pub fn project_tangent(x: &GrassmannPoint, z: &Matrix) -> Result<TangentVector> {
    x.check_shape(z)?;
    Ok(TangentVector(project(x.as_matrix(), z)))
}

pub(crate) fn project(x: &Matrix, z: &Matrix) -> Matrix {
    z - x * (x.transpose() * z)
}

/// QR retraction: the Q factor of `X + ξ` with positive `diag(R)`.
pub fn retract(x: &GrassmannPoint, xi: &TangentVector) -> Result<GrassmannPoint> {
    x.check_shape(xi.as_matrix())?;
    if xi.0.iter().all(|&v| v == 0.0) {
        return Ok(x.clone());
    }
    Ok(GrassmannPoint(qr_positive(&(x.as_matrix() + xi.as_matrix()))?))
}

fn qr_positive(a: &Matrix) -> Result<Matrix> {
    let scale = a.norm().max(f64::MIN_POSITIVE);
    let qr = a.clone().qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..a.ncols() {
        let d = r[(j, j)];
        if !(d.abs() > 1e-12 * scale) {
            return Err(Error::Numerical(format!(
                "rank-deficient matrix in QR (|R[{j},{j}]| = {:.3e})",
                d.abs()
            )));
        }
        if d < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Ok(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn e(n: usize, i: usize) -> Matrix {
        let mut m = Matrix::zeros(n, 1);
        m[(i, 0)] = 1.0;
        m
    }

    #[test]
    fn projection_removes_normal_component() {
        let x = GrassmannPoint::from_orthonormal(e(2, 0)).unwrap();
        let p = project_tangent(&x, &Matrix::from_column_slice(2, 1, &[1.0, 1.0])).unwrap();
        assert_eq!(p.as_matrix().as_slice(), &[0.0, 1.0]);
        let again = project_tangent(&x, p.as_matrix()).unwrap();
        assert_eq!(again, p);
        assert!(project_tangent(&x, &Matrix::zeros(3, 1)).is_err());
    }

    #[test]
    fn projection_is_tangent_and_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = GrassmannPoint::random(15, 3, &mut rng).unwrap();
        let z = Matrix::from_fn(15, 3, |_, _| rng.sample(StandardNormal));
        let p = project_tangent(&x, &z).unwrap();
        assert!((x.as_matrix().transpose() * p.as_matrix()).norm() <= 1e-12);
        let pp = project_tangent(&x, p.as_matrix()).unwrap();
        assert!((pp.as_matrix() - p.as_matrix()).amax() < 1e-14);
    }

    #[test]
    fn retraction_of_single_column() {
        let x = GrassmannPoint::from_orthonormal(e(2, 0)).unwrap();
        let t = 0.3_f64;
        let y = retract(&x, &TangentVector(Matrix::from_column_slice(2, 1, &[0.0, t]))).unwrap();
        let s = (1.0 + t * t).sqrt();
        assert!((y.as_matrix()[(0, 0)] - 1.0 / s).abs() < 1e-15);
        assert!((y.as_matrix()[(1, 0)] - t / s).abs() < 1e-15);
    }

    #[test]
    fn zero_step_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = GrassmannPoint::random(6, 2, &mut rng).unwrap();
        assert_eq!(retract(&x, &TangentVector::zeros(6, 2)).unwrap(), x);
    }

    #[test]
    fn retraction_stays_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let x = GrassmannPoint::random(12, 4, &mut rng).unwrap();
            let z = Matrix::from_fn(12, 4, |_, _| 0.1 * rng.sample::<f64, _>(StandardNormal));
            let xi = project_tangent(&x, &z).unwrap();
            let y = retract(&x, &xi).unwrap();
            assert!(y.orthonormality_error() <= 1e-12);
        }
    }

    #[test]
    fn rank_deficient_qr_is_an_error() {
        assert!(GrassmannPoint::orthonormalize(&Matrix::from_element(4, 2, 1.0)).is_err());
        assert!(GrassmannPoint::from_orthonormal(Matrix::from_element(4, 2, 1.0)).is_err());
    }
}
