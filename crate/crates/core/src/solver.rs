//! Co-regularized multi-view hypergraph spectral clustering on 𝒢(k, n).
//!
//! Maximizes
//!
//! ```text
//! f = Σ_l tr(F_lᵀ Θ_l F_l) − Σ_l λ_l D(F_l, F*),    D(F, G) = −tr(F Fᵀ G Gᵀ)
//! ```
//!
//! by alternating trust-region solves: each view against the fixed
//! consensus (`Θ_l + λ_l F* F*ᵀ`), then the consensus against the fixed
//! views (`Θ* = Σ_l λ_l F_l F_lᵀ`). After each sweep the consensus residual
//! `val = tr(F*ᵀ (I − Θ*) F*)` is checked; if `|val| > ε` every λ is halved
//! once and the consensus is reset to its value at the start of the sweep.

use log::debug;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{best_of_restarts, row_normalize, KMeansConfig, KMeansResult};
use crate::error::{Error, Result};
use crate::hypergraph::LaplacianPair;
use crate::manifold::{
    dominant_subspace, rtr_maximize, GrassmannPoint, QuadraticTraceObjective, RtrOutcome, RtrStatus,
    TrustRegionConfig,
};
use crate::Matrix;

/// Standard deviation of the noise added to the initial consensus.
pub const INIT_PERTURBATION: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MhscgConfig {
    pub k: usize,
    pub lambda0: f64,
    pub max_outer: usize,
    pub epsilon: f64,
    pub obj_tol: f64,
    pub lambda_floor: f64,
    pub rtr: TrustRegionConfig,
    pub seed: u64,
}

impl MhscgConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            lambda0: 1.0,
            max_outer: 50,
            epsilon: 1e-5,
            obj_tol: 1e-6,
            lambda_floor: 1e-8,
            rtr: TrustRegionConfig::default(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda0 > 0.0) || !(self.epsilon > 0.0) || !(self.lambda_floor > 0.0) {
            return Err(Error::InvalidArgument(
                "lambda0, epsilon and lambda_floor must be positive".into(),
            ));
        }
        if self.max_outer < 1 {
            return Err(Error::InvalidArgument("max_outer must be at least 1".into()));
        }
        if !(self.obj_tol >= 0.0) {
            return Err(Error::InvalidArgument("obj_tol must be non-negative".into()));
        }
        if self.k < 1 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        Ok(())
    }
}

/// Variables of the alternating scheme plus the fixed per-view Laplacians.
#[derive(Debug, Clone)]
pub struct SolverState<'a> {
    thetas: &'a [LaplacianPair],
    pub views: Vec<GrassmannPoint>,
    pub consensus: GrassmannPoint,
    /// Consensus at the start of the current outer iteration (restored on halving).
    pub consensus_at_start: GrassmannPoint,
    pub lambdas: Vec<f64>,
    pub lambda_floor: f64,
    pub iteration: usize,
}

impl<'a> SolverState<'a> {
    pub fn new(
        thetas: &'a [LaplacianPair],
        views: Vec<GrassmannPoint>,
        consensus: GrassmannPoint,
        lambdas: Vec<f64>,
    ) -> Result<Self> {
        if thetas.is_empty() || thetas.len() != views.len() || views.len() != lambdas.len() {
            return Err(Error::shape(
                format!("{} Laplacians, views and weights", thetas.len()),
                format!("{} views and {} weights", views.len(), lambdas.len()),
            ));
        }
        let (n, k) = (consensus.n(), consensus.k());
        for (theta, view) in thetas.iter().zip(&views) {
            if theta.n() != n || view.n() != n || view.k() != k {
                return Err(Error::shape(
                    format!("n = {n}, k = {k} for every view"),
                    format!("Θ of {}, view {}×{}", theta.n(), view.n(), view.k()),
                ));
            }
        }
        if lambdas.iter().any(|&l| !(l > 0.0)) {
            return Err(Error::InvalidArgument("λ must be positive".into()));
        }
        Ok(Self {
            thetas,
            views,
            consensus_at_start: consensus.clone(),
            consensus,
            lambdas,
            lambda_floor: 1e-8,
            iteration: 0,
        })
    }

    pub fn thetas(&self) -> &[LaplacianPair] {
        self.thetas
    }

    pub fn n(&self) -> usize {
        self.consensus.n()
    }

    pub fn k(&self) -> usize {
        self.consensus.k()
    }

    /// `Θ* = Σ_l λ_l F_l F_lᵀ`.
    pub fn consensus_matrix(&self) -> Matrix {
        let n = self.n();
        let mut theta_star = Matrix::zeros(n, n);
        for (view, &lambda) in self.views.iter().zip(&self.lambdas) {
            let f = view.as_matrix();
            theta_star.gemm(lambda, f, &f.transpose(), 1.0);
        }
        theta_star
    }
}

/// `D(F, G) = −tr(F Fᵀ G Gᵀ) = −‖FᵀG‖²_F`, in `[−k, 0]`.
pub fn discrepancy(f: &GrassmannPoint, g: &GrassmannPoint) -> Result<f64> {
    if f.as_matrix().shape() != g.as_matrix().shape() {
        return Err(Error::shape(
            format!("{}×{}", f.n(), f.k()),
            format!("{}×{}", g.n(), g.k()),
        ));
    }
    Ok(-(f.as_matrix().transpose() * g.as_matrix()).norm_squared())
}

fn view_term(theta: &Matrix, f: &GrassmannPoint) -> f64 {
    let f = f.as_matrix();
    f.dot(&(theta * f))
}

/// `f = Σ_l tr(F_lᵀ Θ_l F_l) − Σ_l λ_l D(F_l, F*)`.
pub fn objective(state: &SolverState) -> f64 {
    state
        .thetas
        .iter()
        .zip(&state.views)
        .zip(&state.lambdas)
        .map(|((theta, view), &lambda)| {
            let coupling = (view.as_matrix().transpose() * state.consensus.as_matrix()).norm_squared();
            view_term(&theta.theta, view) + lambda * coupling
        })
        .sum()
}

/// Trust-region solve of view `l`'s subproblem, `max tr(Fᵀ (Θ_l + λ_l F*F*ᵀ) F)`,
/// warm-started from the current `F_l`.
pub fn update_view(state: &SolverState, l: usize, rtr: &TrustRegionConfig) -> Result<RtrOutcome> {
    let theta = state
        .thetas
        .get(l)
        .ok_or_else(|| Error::InvalidArgument(format!("view index {l} out of range")))?;
    let c = state.consensus.as_matrix();
    let mut m = theta.theta.clone();
    m.gemm(state.lambdas[l], c, &c.transpose(), 1.0);
    let m = (&m + m.transpose()) * 0.5;
    rtr_maximize(&QuadraticTraceObjective::new(m)?, &state.views[l], rtr)
}

/// Trust-region solve of `max tr(F*ᵀ Θ* F*)`, warm-started from the current consensus.
pub fn update_consensus(state: &SolverState, rtr: &TrustRegionConfig) -> Result<RtrOutcome> {
    let m = state.consensus_matrix();
    let m = (&m + m.transpose()) * 0.5;
    rtr_maximize(&QuadraticTraceObjective::new(m)?, &state.consensus, rtr)
}

/// `val = tr(F*ᵀ (I − Θ*) F*) = k − Σ_l λ_l ‖F_lᵀ F*‖²_F`.
pub fn consensus_residual(state: &SolverState) -> f64 {
    let c = state.consensus.as_matrix();
    let captured: f64 = state
        .views
        .iter()
        .zip(&state.lambdas)
        .map(|(view, &lambda)| lambda * (view.as_matrix().transpose() * c).norm_squared())
        .sum();
    state.k() as f64 - captured
}

/// Applies the adaptive weight rule once. Returns `true` when `|val| > ε`,
/// in which case every λ has been halved (not below the floor) and the
/// consensus restored to `consensus_at_start`.
pub fn adapt_lambda(state: &mut SolverState, val: f64, epsilon: f64) -> bool {
    if val.abs() <= epsilon {
        return false;
    }
    for lambda in &mut state.lambdas {
        *lambda = (*lambda / 2.0).max(state.lambda_floor);
    }
    state.consensus = state.consensus_at_start.clone();
    true
}

/// One outer iteration of the alternating loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iter: usize,
    /// Objective at the end of the iteration under `lambdas`.
    pub objective: f64,
    /// Objective after the sweep, before the λ update, under the weights
    /// that were in force during the iteration.
    pub sweep_objective: f64,
    /// Consensus residual that drove the λ decision.
    pub val: f64,
    /// Weights after the adaptive update; the weights in force for the next iteration.
    pub lambdas: Vec<f64>,
    pub lambda_halved: bool,
    pub view_rtr_iterations: Vec<usize>,
    pub consensus_rtr_iterations: usize,
    /// Whether every subproblem reached the gradient tolerance.
    pub subproblems_converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    /// Objective of the initial state under the initial weights.
    pub initial_objective: f64,
    pub initial_lambdas: Vec<f64>,
    pub records: Vec<IterationRecord>,
    /// True when the relative objective change fell below `obj_tol`.
    pub converged: bool,
}

impl ConvergenceTrace {
    /// Iterations where the objective dropped by more than `slack` at fixed
    /// weights: either the sweep lost ground against the previous record, or
    /// the recorded objective fell between records with equal weights.
    pub fn monotonicity_violations(&self, slack: f64) -> Vec<usize> {
        let mut prev_obj = self.initial_objective;
        let mut prev_lambdas = &self.initial_lambdas;
        let mut bad = Vec::new();
        for rec in &self.records {
            let sweep_dropped = rec.sweep_objective < prev_obj - slack;
            let segment_dropped = &rec.lambdas == prev_lambdas && rec.objective < prev_obj - slack;
            if sweep_dropped || segment_dropped {
                bad.push(rec.iter);
            }
            prev_obj = rec.objective;
            prev_lambdas = &rec.lambdas;
        }
        bad
    }
}

#[derive(Debug, Clone)]
pub struct MhscgOutcome {
    pub consensus: GrassmannPoint,
    pub views: Vec<GrassmannPoint>,
    pub lambdas: Vec<f64>,
    pub trace: ConvergenceTrace,
}

fn check_thetas(thetas: &[LaplacianPair], k: usize) -> Result<usize> {
    let n = thetas
        .first()
        .ok_or_else(|| Error::InvalidArgument("no Laplacians given".into()))?
        .n();
    if let Some(l) = thetas.iter().position(|t| t.n() != n || !t.theta.is_square()) {
        return Err(Error::shape(
            format!("{n}×{n} Laplacian"),
            format!("view {l}: {}×{}", thetas[l].theta.nrows(), thetas[l].theta.ncols()),
        ));
    }
    if k > n {
        return Err(Error::InvalidArgument(format!("k = {k} exceeds n = {n}")));
    }
    Ok(n)
}

/// Initial state: each view at the top-k eigenspace of its own Θ, the
/// consensus at the (slightly perturbed) top-k eigenspace of the λ-weighted mean Θ.
pub fn initial_state<'a>(thetas: &'a [LaplacianPair], cfg: &MhscgConfig) -> Result<SolverState<'a>> {
    cfg.validate()?;
    let n = check_thetas(thetas, cfg.k)?;
    let views = thetas
        .par_iter()
        .map(|t| dominant_subspace(&t.theta, cfg.k))
        .collect::<Result<Vec<_>>>()?;
    let lambdas = vec![cfg.lambda0; thetas.len()];
    let weight_sum: f64 = lambdas.iter().sum();
    let mut mean = Matrix::zeros(n, n);
    for (t, &lambda) in thetas.iter().zip(&lambdas) {
        mean += &t.theta * (lambda / weight_sum);
    }
    let base = dominant_subspace(&mean, cfg.k)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noisy = base.as_matrix()
        + Matrix::from_fn(n, cfg.k, |_, _| INIT_PERTURBATION * rng.sample::<f64, _>(StandardNormal));
    let consensus = GrassmannPoint::orthonormalize(&noisy)?;
    let mut state = SolverState::new(thetas, views, consensus, lambdas)?;
    state.lambda_floor = cfg.lambda_floor;
    Ok(state)
}

/// The alternating optimization loop. Stops after `max_outer` iterations or
/// once `|f_t − f_{t−1}| ≤ obj_tol · max(1, |f_{t−1}|)`.
pub fn run(thetas: &[LaplacianPair], cfg: &MhscgConfig) -> Result<MhscgOutcome> {
    let mut state = initial_state(thetas, cfg)?;
    let initial_objective = objective(&state);
    let mut trace = ConvergenceTrace {
        initial_objective,
        initial_lambdas: state.lambdas.clone(),
        records: Vec::with_capacity(cfg.max_outer),
        converged: false,
    };
    let mut prev = initial_objective;

    for t in 1..=cfg.max_outer {
        state.iteration = t;
        state.consensus_at_start = state.consensus.clone();

        let outcomes = (0..state.views.len())
            .into_par_iter()
            .map(|l| update_view(&state, l, &cfg.rtr))
            .collect::<Result<Vec<_>>>()?;
        let mut all_converged = true;
        let mut view_iters = Vec::with_capacity(outcomes.len());
        for (l, out) in outcomes.into_iter().enumerate() {
            all_converged &= out.status == RtrStatus::Converged;
            view_iters.push(out.iterations);
            state.views[l] = out.point;
        }

        let consensus_out = update_consensus(&state, &cfg.rtr)?;
        all_converged &= consensus_out.status == RtrStatus::Converged;
        let consensus_iters = consensus_out.iterations;
        state.consensus = consensus_out.point;

        let sweep_objective = objective(&state);
        let val = consensus_residual(&state);
        let halved = adapt_lambda(&mut state, val, cfg.epsilon);
        let f = objective(&state);
        debug!("iter {t}: f = {f:.12}, val = {val:.3e}, halved = {halved}");

        trace.records.push(IterationRecord {
            iter: t,
            objective: f,
            sweep_objective,
            val,
            lambdas: state.lambdas.clone(),
            lambda_halved: halved,
            view_rtr_iterations: view_iters,
            consensus_rtr_iterations: consensus_iters,
            subproblems_converged: all_converged,
        });

        if (f - prev).abs() <= cfg.obj_tol * prev.abs().max(1.0) {
            trace.converged = true;
            break;
        }
        prev = f;
    }

    Ok(MhscgOutcome {
        consensus: state.consensus,
        views: state.views,
        lambdas: state.lambdas,
        trace,
    })
}

/// Single-view hypergraph spectral clustering: top-k eigenvectors of Θ,
/// row-normalized, clustered with k-means.
pub fn hsc_single_view(theta: &LaplacianPair, k: usize, kmeans: &KMeansConfig) -> Result<KMeansResult> {
    let f = dominant_subspace(&theta.theta, k)?;
    let emb = row_normalize(f.as_matrix());
    best_of_restarts(emb.as_matrix(), &KMeansConfig { k, ..kmeans.clone() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{synth_multiview, ViewMatrix};
    use crate::hypergraph::view_laplacian;
    use crate::manifold::principal_angles;
    use crate::metrics::accuracy;

    fn random_point(n: usize, k: usize, rng: &mut ChaCha8Rng) -> GrassmannPoint {
        GrassmannPoint::random(n, k, rng).unwrap()
    }

    fn identity_thetas(n: usize, r: usize) -> Vec<LaplacianPair> {
        (0..r).map(|_| LaplacianPair::from_theta(Matrix::identity(n, n)).unwrap()).collect()
    }

    fn random_thetas(n: usize, r: usize, rng: &mut ChaCha8Rng) -> Vec<LaplacianPair> {
        (0..r)
            .map(|_| {
                let a = Matrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
                LaplacianPair::from_theta((&a + a.transpose()) * 0.25).unwrap()
            })
            .collect()
    }

    fn max_angle(a: &GrassmannPoint, b: &GrassmannPoint) -> f64 {
        principal_angles(a, b).unwrap().into_iter().fold(0.0, f64::max)
    }

    #[test]
    fn discrepancy_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_point(8, 3, &mut rng);
        assert!((discrepancy(&f, &f).unwrap() + 3.0).abs() < 1e-12);

        let e12 = GrassmannPoint::from_orthonormal(Matrix::identity(4, 2)).unwrap();
        let mut m = Matrix::zeros(4, 2);
        m[(2, 0)] = 1.0;
        m[(3, 1)] = 1.0;
        let e34 = GrassmannPoint::from_orthonormal(m).unwrap();
        assert_eq!(discrepancy(&e12, &e34).unwrap(), 0.0);

        let g = random_point(8, 3, &mut rng);
        let d = discrepancy(&f, &g).unwrap();
        let via_angles: f64 = -principal_angles(&f, &g).unwrap().iter().map(|a| a.cos().powi(2)).sum::<f64>();
        assert!((d - via_angles).abs() < 1e-10);
        assert!((d - discrepancy(&g, &f).unwrap()).abs() < 1e-14);
        assert!((-3.0..=0.0).contains(&d));
        assert!(discrepancy(&f, &random_point(8, 2, &mut rng)).is_err());
    }

    #[test]
    fn objective_with_identity_laplacians() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let thetas = identity_thetas(7, 2);
        let f = random_point(7, 3, &mut rng);
        let state = SolverState::new(&thetas, vec![f.clone(), f.clone()], f, vec![1.0, 1.0]).unwrap();
        assert!((objective(&state) - 12.0).abs() < 1e-12);
    }

    #[test]
    fn objective_matches_naive_sums() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (n, k, r) = (9, 2, 3);
        let thetas = random_thetas(n, r, &mut rng);
        let views: Vec<_> = (0..r).map(|_| random_point(n, k, &mut rng)).collect();
        let consensus = random_point(n, k, &mut rng);
        let lambdas = vec![0.7, 1.3, 0.2];
        let state = SolverState::new(&thetas, views.clone(), consensus.clone(), lambdas.clone()).unwrap();

        let mut naive = 0.0;
        for l in 0..r {
            let f = views[l].as_matrix();
            naive += (f.transpose() * &thetas[l].theta * f).trace();
        }
        for l in 0..r {
            let f = views[l].as_matrix();
            let c = consensus.as_matrix();
            let d = -(f * f.transpose() * c * c.transpose()).trace();
            naive -= lambdas[l] * d;
        }
        assert!((objective(&state) - naive).abs() < 1e-10);
    }

    #[test]
    fn objective_is_rotation_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let thetas = random_thetas(10, 2, &mut rng);
        let views: Vec<_> = (0..2).map(|_| random_point(10, 3, &mut rng)).collect();
        let consensus = random_point(10, 3, &mut rng);
        let state = SolverState::new(&thetas, views.clone(), consensus.clone(), vec![1.0, 0.5]).unwrap();
        let q = random_point(3, 3, &mut rng);
        let rotated = SolverState::new(
            &thetas,
            views.iter().map(|v| v.rotated(q.as_matrix()).unwrap()).collect(),
            consensus.rotated(q.as_matrix()).unwrap(),
            vec![1.0, 0.5],
        )
        .unwrap();
        assert!((objective(&state) - objective(&rotated)).abs() <= 1e-10);
    }

    #[test]
    fn residual_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let thetas = identity_thetas(6, 2);
        let f = random_point(6, 2, &mut rng);
        let half = SolverState::new(&thetas, vec![f.clone(), f.clone()], f.clone(), vec![0.5, 0.5]).unwrap();
        assert!(consensus_residual(&half).abs() < 1e-12);
        let full = SolverState::new(&thetas, vec![f.clone(), f.clone()], f.clone(), vec![1.0, 1.0]).unwrap();
        assert!((consensus_residual(&full) + 2.0).abs() < 1e-12);

        let views: Vec<_> = (0..2).map(|_| random_point(6, 2, &mut rng)).collect();
        let c = random_point(6, 2, &mut rng);
        let state = SolverState::new(&thetas, views, c, vec![0.3, 0.9]).unwrap();
        let delta_star = Matrix::identity(6, 6) - state.consensus_matrix();
        let direct = (state.consensus.as_matrix().transpose() * delta_star * state.consensus.as_matrix()).trace();
        assert!((consensus_residual(&state) - direct).abs() < 1e-12);
    }

    #[test]
    fn lambda_adaptation_rules() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let thetas = identity_thetas(5, 2);
        let start = random_point(5, 2, &mut rng);
        let moved = random_point(5, 2, &mut rng);
        let mut state =
            SolverState::new(&thetas, vec![start.clone(), start.clone()], start.clone(), vec![1.0, 1.0]).unwrap();
        state.consensus = moved.clone();

        assert!(!adapt_lambda(&mut state, 0.0, 1e-5));
        assert_eq!(state.lambdas, vec![1.0, 1.0]);
        assert_eq!(state.consensus, moved);

        assert!(adapt_lambda(&mut state, 1.0, 1e-5));
        assert_eq!(state.lambdas, vec![0.5, 0.5]);
        assert_eq!(state.consensus, start);

        state.lambdas = vec![1e-8, 1e-8];
        state.consensus = moved;
        assert!(adapt_lambda(&mut state, -1.0, 1e-5));
        assert_eq!(state.lambdas, vec![1e-8, 1e-8]);
        assert_eq!(state.consensus, start);
    }

    #[test]
    fn view_update_without_coupling_is_plain_eigenspace() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let thetas = random_thetas(12, 1, &mut rng);
        let init = random_point(12, 3, &mut rng);
        let mut state = SolverState::new(&thetas, vec![init.clone()], init, vec![1.0]).unwrap();
        state.lambdas[0] = 1e-300;
        let out = update_view(&state, 0, &TrustRegionConfig::default()).unwrap();
        let oracle = dominant_subspace(&thetas[0].theta, 3).unwrap();
        assert!(max_angle(&out.point, &oracle) <= 1e-6);
        assert!(out.values.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn strong_coupling_pulls_view_to_consensus() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let thetas = random_thetas(10, 1, &mut rng);
        let target = dominant_subspace(&thetas[0].theta, 2).unwrap();
        let start = random_point(10, 2, &mut rng);
        let state = SolverState::new(&thetas, vec![start], target.clone(), vec![50.0]).unwrap();
        let out = update_view(&state, 0, &TrustRegionConfig::default()).unwrap();
        assert!(max_angle(&out.point, &target) <= 1e-6);
        assert!(out.point.orthonormality_error() < 1e-10);
    }

    #[test]
    fn consensus_follows_single_or_identical_views() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let thetas = identity_thetas(9, 3);
        let f = random_point(9, 2, &mut rng);
        let start = random_point(9, 2, &mut rng);
        let one = SolverState::new(&thetas[..1], vec![f.clone()], start.clone(), vec![1.0]).unwrap();
        let out = update_consensus(&one, &TrustRegionConfig::default()).unwrap();
        assert!(max_angle(&out.point, &f) <= 1e-6);

        let same = SolverState::new(&thetas, vec![f.clone(); 3], start, vec![0.4; 3]).unwrap();
        let out = update_consensus(&same, &TrustRegionConfig::default()).unwrap();
        assert!(max_angle(&out.point, &f) <= 1e-6);
    }

    #[test]
    fn consensus_matches_eigen_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let thetas = identity_thetas(10, 3);
        let views: Vec<_> = (0..3).map(|_| random_point(10, 2, &mut rng)).collect();
        let state = SolverState::new(&thetas, views, random_point(10, 2, &mut rng), vec![1.0, 0.6, 0.3]).unwrap();
        let (oracle, vals) = crate::manifold::dominant_eigenpairs(&state.consensus_matrix(), 3).unwrap();
        assert!(vals[1] - vals[2] >= 1e-6);
        let oracle = GrassmannPoint::from_orthonormal(oracle.as_matrix().columns(0, 2).into_owned()).unwrap();
        let out = update_consensus(&state, &TrustRegionConfig::default()).unwrap();
        assert!(max_angle(&out.point, &oracle) <= 1e-6);
    }

    fn block_theta(n: usize, blocks: usize) -> LaplacianPair {
        let size = n / blocks;
        let mut theta = Matrix::zeros(n, n);
        for b in 0..blocks {
            for i in 0..size {
                for j in 0..size {
                    theta[(b * size + i, b * size + j)] = 1.0 / size as f64;
                }
            }
        }
        LaplacianPair::from_theta(theta).unwrap()
    }

    #[test]
    fn identical_block_views_share_the_subspace() {
        let thetas = vec![block_theta(24, 3); 3];
        let out = run(&thetas, &MhscgConfig::new(3)).unwrap();
        let oracle = dominant_subspace(&thetas[0].theta, 3).unwrap();
        assert!(max_angle(&out.consensus, &oracle) <= 1e-4);
        assert!(out.trace.monotonicity_violations(1e-9).is_empty());
    }

    #[test]
    fn single_iteration_is_recorded_once() {
        let thetas = vec![block_theta(12, 2); 2];
        let mut cfg = MhscgConfig::new(2);
        cfg.max_outer = 1;
        let out = run(&thetas, &cfg).unwrap();
        assert_eq!(out.trace.records.len(), 1);
        assert_eq!(out.trace.records[0].view_rtr_iterations.len(), 2);
    }

    #[test]
    fn run_rejects_inconsistent_sizes() {
        let thetas = vec![block_theta(12, 2), block_theta(10, 2)];
        assert!(run(&thetas, &MhscgConfig::new(2)).is_err());
        assert!(run(&[block_theta(4, 2)], &MhscgConfig::new(5)).is_err());
        let mut cfg = MhscgConfig::new(2);
        cfg.lambda0 = 0.0;
        assert!(run(&[block_theta(4, 2)], &cfg).is_err());
    }

    #[test]
    fn runs_are_deterministic_and_monotone() {
        let ds = synth_multiview(15, 3, 2, &[3, 4], 1.0, 5).unwrap();
        let thetas: Vec<_> = ds.views.iter().map(|v| view_laplacian(v, 5).unwrap().1).collect();
        let mut cfg = MhscgConfig::new(3);
        cfg.seed = 42;
        let a = run(&thetas, &cfg).unwrap();
        let b = run(&thetas, &cfg).unwrap();
        assert_eq!(a.trace, b.trace);
        assert!(a.trace.monotonicity_violations(1e-9).is_empty());
        assert!(a.lambdas.iter().all(|&l| l > 0.0 && l <= cfg.lambda0));
    }

    fn two_blobs(perm: &[usize]) -> (ViewMatrix, Vec<usize>) {
        let base: Vec<(f64, f64, usize)> = (0..20)
            .map(|i| {
                let c = i / 10;
                let off = c as f64 * 50.0;
                (off + (i % 10) as f64 * 0.1, ((i * 7) % 10) as f64 * 0.1, c)
            })
            .collect();
        let rows: Vec<f64> = perm.iter().flat_map(|&i| [base[i].0, base[i].1]).collect();
        let labels = perm.iter().map(|&i| base[i].2).collect();
        (ViewMatrix::new(Matrix::from_row_slice(20, 2, &rows)).unwrap(), labels)
    }

    #[test]
    fn hsc_recovers_disconnected_components() {
        let ident: Vec<usize> = (0..20).collect();
        let (view, truth) = two_blobs(&ident);
        let (_, lap) = view_laplacian(&view, 3).unwrap();
        let res = hsc_single_view(&lap, 2, &KMeansConfig::new(2, 0)).unwrap();
        assert_eq!(accuracy(&res.labels, &truth).unwrap(), 1.0);

        let ones = hsc_single_view(&lap, 1, &KMeansConfig::new(1, 0)).unwrap();
        assert!(ones.labels.iter().all(|&l| l == 0));
    }

    #[test]
    fn hsc_is_permutation_equivariant() {
        let ident: Vec<usize> = (0..20).collect();
        let perm: Vec<usize> = (0..20).map(|i| (i * 7 + 3) % 20).collect();
        let (v0, _) = two_blobs(&ident);
        let (v1, _) = two_blobs(&perm);
        let l0 = hsc_single_view(&view_laplacian(&v0, 3).unwrap().1, 2, &KMeansConfig::new(2, 1)).unwrap();
        let l1 = hsc_single_view(&view_laplacian(&v1, 3).unwrap().1, 2, &KMeansConfig::new(2, 1)).unwrap();
        let permuted: Vec<usize> = perm.iter().map(|&i| l0.labels[i]).collect();
        assert_eq!(accuracy(&permuted, &l1.labels).unwrap(), 1.0);
    }
}
