//! Row normalization of spectral embeddings and k-means++ / Lloyd clustering.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Matrix;

/// Rows whose norm falls below this are treated as zero.
pub const ZERO_ROW_NORM: f64 = 1e-12;

/// Spectral embedding with unit-norm (or exactly zero) rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding(Matrix);

impl Embedding {
    pub fn as_matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }
}

pub fn row_normalize(f: &Matrix) -> Embedding {
    let mut out = f.clone();
    for mut row in out.row_iter_mut() {
        let norm = row.norm();
        if norm < ZERO_ROW_NORM {
            row.fill(0.0);
        } else {
            row /= norm;
        }
    }
    Embedding(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub restarts: usize,
    pub max_iters: usize,
    /// Stop once no center moves farther than this.
    pub tol: f64,
    pub seed: u64,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        Self {
            k,
            restarts: 30,
            max_iters: 100,
            tol: 1e-8,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    /// Sum of squared distances to the assigned centers.
    pub inertia: f64,
    /// `k × d`.
    pub centers: Matrix,
    pub iterations: usize,
    /// Inertia after each assignment step.
    pub inertia_history: Vec<f64>,
}

/// Row-major copy of the points for cache-friendly distance loops.
struct Points {
    data: Vec<f64>,
    n: usize,
    d: usize,
}

impl Points {
    fn new(m: &Matrix) -> Self {
        let (n, d) = m.shape();
        let mut data = Vec::with_capacity(n * d);
        for row in m.row_iter() {
            data.extend(row.iter());
        }
        Self { data, n, d }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check(points: &Matrix, cfg: &KMeansConfig) -> Result<()> {
    if cfg.k < 1 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if points.nrows() < cfg.k {
        return Err(Error::InvalidArgument(format!(
            "k-means needs n ≥ k, got n = {} and k = {}",
            points.nrows(),
            cfg.k
        )));
    }
    if cfg.restarts < 1 {
        return Err(Error::InvalidArgument("restarts must be at least 1".into()));
    }
    if points.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite point coordinate".into()));
    }
    Ok(())
}

/// One k-means++ seeded Lloyd run using `cfg.seed`. Rows of `points` are samples.
pub fn kmeans(points: &Matrix, cfg: &KMeansConfig) -> Result<KMeansResult> {
    check(points, cfg)?;
    Ok(lloyd(&Points::new(points), cfg, cfg.seed))
}

/// Best (lowest-inertia) of `cfg.restarts` runs seeded `seed, seed + 1, …`.
/// Ties go to the earliest restart.
pub fn best_of_restarts(points: &Matrix, cfg: &KMeansConfig) -> Result<KMeansResult> {
    check(points, cfg)?;
    let pts = Points::new(points);
    let runs: Vec<KMeansResult> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| lloyd(&pts, cfg, cfg.seed.wrapping_add(r as u64)))
        .collect();
    let best = runs
        .into_iter()
        .reduce(|best, run| if run.inertia < best.inertia { run } else { best })
        .expect("at least one restart");
    Ok(best)
}

fn seed_centers(pts: &Points, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = pts.n;
    let mut chosen = vec![false; n];
    let first = rng.random_range(0..n);
    chosen[first] = true;
    let mut centers = vec![pts.row(first).to_vec()];
    let mut closest: Vec<f64> = (0..n).map(|i| sq_dist(pts.row(i), &centers[0])).collect();

    while centers.len() < k {
        let total: f64 = closest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut pick = None;
            for (i, &w) in closest.iter().enumerate() {
                if w > 0.0 {
                    pick = Some(i);
                    if target < w {
                        break;
                    }
                    target -= w;
                }
            }
            pick.expect("positive total weight")
        } else {
            // all remaining points coincide with a center
            let free: Vec<usize> = (0..n).filter(|&i| !chosen[i]).collect();
            free[rng.random_range(0..free.len())]
        };
        chosen[pick] = true;
        let c = pts.row(pick).to_vec();
        for (i, best) in closest.iter_mut().enumerate() {
            *best = best.min(sq_dist(pts.row(i), &c));
        }
        centers.push(c);
    }
    centers
}

fn assign(pts: &Points, centers: &[Vec<f64>], labels: &mut [usize], dists: &mut [f64]) -> f64 {
    let mut inertia = 0.0;
    for i in 0..pts.n {
        let row = pts.row(i);
        let (mut best, mut best_d) = (0, f64::INFINITY);
        for (c, center) in centers.iter().enumerate() {
            let d = sq_dist(row, center);
            if d < best_d {
                best = c;
                best_d = d;
            }
        }
        labels[i] = best;
        dists[i] = best_d;
        inertia += best_d;
    }
    inertia
}

fn lloyd(pts: &Points, cfg: &KMeansConfig, seed: u64) -> KMeansResult {
    let (n, d, k) = (pts.n, pts.d, cfg.k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = seed_centers(pts, k, &mut rng);
    let mut labels = vec![0usize; n];
    let mut dists = vec![0.0; n];
    let mut history = Vec::new();
    let mut iterations = 0;

    loop {
        iterations += 1;
        history.push(assign(pts, &centers, &mut labels, &mut dists));

        let mut sums = vec![vec![0.0; d]; k];
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[labels[i]] += 1;
            for (s, x) in sums[labels[i]].iter_mut().zip(pts.row(i)) {
                *s += x;
            }
        }
        let mut next: Vec<Vec<f64>> = sums
            .into_iter()
            .zip(&counts)
            .map(|(s, &c)| {
                if c == 0 {
                    s
                } else {
                    s.into_iter().map(|v| v / c as f64).collect()
                }
            })
            .collect();
        for c in 0..k {
            if counts[c] == 0 {
                let far = (0..n)
                    .max_by(|&a, &b| dists[a].total_cmp(&dists[b]).then(b.cmp(&a)))
                    .expect("n ≥ k ≥ 1");
                next[c] = pts.row(far).to_vec();
                dists[far] = 0.0;
            }
        }

        let movement = centers
            .iter()
            .zip(&next)
            .map(|(a, b)| sq_dist(a, b).sqrt())
            .fold(0.0, f64::max);
        centers = next;
        if movement <= cfg.tol || iterations >= cfg.max_iters {
            break;
        }
    }

    // labels are consistent with the final centers up to the last (sub-tol) move;
    // report inertia against the centers actually returned
    let inertia = (0..n).map(|i| sq_dist(pts.row(i), &centers[labels[i]])).sum();
    let centers = Matrix::from_fn(k, d, |c, j| centers[c][j]);
    KMeansResult {
        labels,
        inertia,
        centers,
        iterations,
        inertia_history: history,
    }
}
