//! Per-view hypergraph construction.
//!
//! Every sample is the centroid of one hyperedge. The hyperedge's other
//! members are the σ samples that reconstruct the centroid in the sparse
//! simplex-constrained representation, weighted by their coefficients. With
//! `m = n` hyperedges and unit hyperedge weights, the normalized Laplacian
//! pair is `Θ = Dv^{-1/2} H W De^{-1} Hᵀ Dv^{-1/2}` and `Δ = I − Θ`.

use rayon::prelude::*;

use crate::dataset::ViewMatrix;
use crate::error::{Error, Result};
use crate::{Matrix, Vector};

pub const DEFAULT_SIGMA: usize = 10;

/// Neighbor count actually used for `n` samples: `requested` clamped to `n − 2`.
pub fn effective_sigma(requested: usize, n: usize) -> Result<usize> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!(
            "hypergraph construction needs at least 3 samples, got {n}"
        )));
    }
    Ok(requested.clamp(1, n - 2))
}

/// Squared Euclidean distances between samples; symmetric with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct SquaredDistanceMatrix(Matrix);

impl SquaredDistanceMatrix {
    /// Wraps a precomputed matrix after checking shape, symmetry and signs.
    pub fn from_matrix(c: Matrix) -> Result<Self> {
        if !c.is_square() {
            return Err(Error::shape("square distance matrix", format!("{}×{}", c.nrows(), c.ncols())));
        }
        let n = c.nrows();
        for i in 0..n {
            if c[(i, i)] != 0.0 {
                return Err(Error::InvalidArgument(format!("nonzero diagonal at {i}")));
            }
            for j in 0..i {
                let (a, b) = (c[(i, j)], c[(j, i)]);
                if a.is_nan() || b.is_nan() {
                    return Err(Error::InvalidArgument(format!("NaN distance at ({i}, {j})")));
                }
                if a < 0.0 || a != b {
                    return Err(Error::InvalidArgument(format!(
                        "distance ({i}, {j}) is negative or asymmetric"
                    )));
                }
            }
        }
        Ok(Self(c))
    }

    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }
}

pub fn pairwise_sq_dists(x: &ViewMatrix) -> SquaredDistanceMatrix {
    let x = x.data();
    let n = x.nrows();
    let gram = x * x.transpose();
    let mut c = Matrix::zeros(n, n);
    for j in 0..n {
        for i in 0..j {
            let d = (gram[(i, i)] + gram[(j, j)] - 2.0 * gram[(i, j)]).max(0.0);
            c[(i, j)] = d;
            c[(j, i)] = d;
        }
    }
    SquaredDistanceMatrix(c)
}

/// Row-stochastic sparse similarity with exactly σ candidate neighbors per row.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    weights: Matrix,
    sigma: usize,
}

impl SimilarityMatrix {
    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn sigma(&self) -> usize {
        self.sigma
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }
}

/// Closed-form optimum of the per-row simplex QP
/// `min Σ_j c_ij a_ij + α‖a_i‖²` with `a_ii = 0`, `a_i ≥ 0`, `1ᵀa_i = 1`,
/// where α is the value that leaves exactly σ neighbors in the support:
///
/// `a_ij = (c_{i,σ+1} − c_ij) / (σ c_{i,σ+1} − Σ_{h≤σ} c_ih)` for the σ nearest `j`.
///
/// Ties are broken by ascending sample index. When the first σ+1 distances
/// coincide the denominator vanishes and the σ nearest get `1/σ` each.
pub fn sparse_similarity(c: &SquaredDistanceMatrix, sigma: usize) -> Result<SimilarityMatrix> {
    let n = c.n();
    if sigma < 1 || sigma + 2 > n {
        return Err(Error::InvalidArgument(format!(
            "sigma = {sigma} must lie in [1, n − 2] for n = {n}"
        )));
    }
    let dist = c.as_matrix();
    if dist.iter().any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("NaN in distance matrix".into()));
    }

    let rows: Vec<Vec<(usize, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| row_weights(dist, i, sigma))
        .collect();

    let mut weights = Matrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (j, a) in row {
            weights[(i, j)] = a;
        }
    }
    Ok(SimilarityMatrix { weights, sigma })
}

fn row_weights(dist: &Matrix, i: usize, sigma: usize) -> Vec<(usize, f64)> {
    let n = dist.nrows();
    let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
    // stable: equal distances keep ascending index order
    order.sort_by(|&a, &b| dist[(i, a)].total_cmp(&dist[(i, b)]));

    let boundary = dist[(i, order[sigma])];
    let head: f64 = order[..sigma].iter().map(|&j| dist[(i, j)]).sum();
    let denom = sigma as f64 * boundary - head;

    let degenerate = denom <= 4.0 * f64::EPSILON * sigma as f64 * boundary.max(f64::MIN_POSITIVE);
    order[..sigma]
        .iter()
        .map(|&j| {
            let a = if degenerate {
                1.0 / sigma as f64
            } else {
                (boundary - dist[(i, j)]) / denom
            };
            (j, a)
        })
        .collect()
}

/// Incidence structure and degrees of a hypergraph with `m = n` hyperedges.
#[derive(Debug, Clone, PartialEq)]
pub struct Hypergraph {
    /// `H[(v, e)]`: membership of vertex `v` in hyperedge `e`, in `[0, 1]`.
    pub incidence: Matrix,
    /// Diagonal of W.
    pub edge_weights: Vector,
    /// Diagonal of Dv: `d(v) = Σ_e w(e) H(v, e)`.
    pub vertex_degrees: Vector,
    /// Diagonal of De: `δ(e) = Σ_v H(v, e)`.
    pub edge_degrees: Vector,
}

/// Hyperedge `e_j` = centroid `v_j` (membership 1) plus the support of row j
/// of the similarity matrix, with membership `H(v_i, e_j) = a_ji`.
pub fn build_incidence(a: &SimilarityMatrix) -> Hypergraph {
    let n = a.n();
    let mut h = a.weights().transpose();
    for j in 0..n {
        h[(j, j)] = 1.0;
    }
    let w = Vector::from_element(n, 1.0);
    let (dv, de) = degrees(&h, &w).expect("centroid membership keeps every degree positive");
    Hypergraph {
        incidence: h,
        edge_weights: w,
        vertex_degrees: dv,
        edge_degrees: de,
    }
}

/// Vertex and hyperedge degrees `(Dv, De)` as diagonals.
pub fn degrees(h: &Matrix, w: &Vector) -> Result<(Vector, Vector)> {
    if w.len() != h.ncols() {
        return Err(Error::shape(
            format!("{} hyperedge weights", h.ncols()),
            format!("{}", w.len()),
        ));
    }
    if w.iter().any(|&x| !(x > 0.0)) {
        return Err(Error::InvalidArgument("hyperedge weights must be positive".into()));
    }
    let de = Vector::from_iterator(h.ncols(), h.column_iter().map(|col| col.sum()));
    let dv = h * w;
    if let Some(v) = dv.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::Numerical(format!("vertex {v} has zero degree")));
    }
    if let Some(e) = de.iter().position(|&d| !(d > 0.0)) {
        return Err(Error::Numerical(format!("hyperedge {e} has zero degree")));
    }
    Ok((dv, de))
}

/// `Θ = Dv^{-1/2} H W De^{-1} Hᵀ Dv^{-1/2}` and its complement `Δ = I − Θ`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianPair {
    pub theta: Matrix,
    pub delta: Matrix,
}

impl LaplacianPair {
    /// Pair from a symmetric Θ given directly.
    pub fn from_theta(theta: Matrix) -> Result<Self> {
        if !theta.is_square() {
            return Err(Error::shape(
                "square Θ",
                format!("{}×{}", theta.nrows(), theta.ncols()),
            ));
        }
        let n = theta.nrows();
        let delta = Matrix::identity(n, n) - &theta;
        Ok(Self { theta, delta })
    }

    pub fn n(&self) -> usize {
        self.theta.nrows()
    }
}

pub fn laplacian(h: &Matrix, w: &Vector, dv: &Vector, de: &Vector) -> Result<LaplacianPair> {
    let (n, m) = h.shape();
    if dv.len() != n || de.len() != m || w.len() != m {
        return Err(Error::shape(
            format!("Dv of {n}, De and W of {m}"),
            format!("Dv of {}, De of {}, W of {}", dv.len(), de.len(), w.len()),
        ));
    }
    if dv.iter().chain(de.iter()).any(|&d| !(d > 0.0)) {
        return Err(Error::Numerical("singular degree matrix".into()));
    }
    // B = Dv^{-1/2} H (W De^{-1})^{1/2}, Θ = B Bᵀ
    let mut b = h.clone();
    for (j, mut col) in b.column_iter_mut().enumerate() {
        col *= (w[j] / de[j]).sqrt();
    }
    for (i, mut row) in b.row_iter_mut().enumerate() {
        row /= dv[i].sqrt();
    }
    let theta = &b * b.transpose();
    let theta = (&theta + theta.transpose()) * 0.5;
    LaplacianPair::from_theta(theta)
}

/// Hypergraph and Laplacian pair of one view (sparse similarity, incidence, Laplacian).
pub fn view_laplacian(view: &ViewMatrix, sigma: usize) -> Result<(Hypergraph, LaplacianPair)> {
    let sigma = effective_sigma(sigma, view.n_samples())?;
    let c = pairwise_sq_dists(view);
    let a = sparse_similarity(&c, sigma)?;
    let hg = build_incidence(&a);
    let lap = laplacian(
        &hg.incidence,
        &hg.edge_weights,
        &hg.vertex_degrees,
        &hg.edge_degrees,
    )?;
    Ok((hg, lap))
}
