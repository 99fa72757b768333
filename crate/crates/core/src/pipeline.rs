//! End-to-end clustering runs: dataset → per-view Laplacians → embedding →
//! k-means, repeated and scored. Shared by the CLI and the C API.

use log::info;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{best_of_restarts, row_normalize, Embedding, KMeansConfig};
use crate::dataset::MultiViewDataset;
use crate::error::{Error, Result};
use crate::hypergraph::{view_laplacian, LaplacianPair, DEFAULT_SIGMA};
use crate::manifold::{dominant_subspace, TrustRegionConfig};
use crate::metrics::{evaluate, ClusteringScores, MetricReport};
use crate::solver::{self, ConvergenceTrace, MhscgConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Multi-view consensus on the Grassmannian.
    Mhscg,
    /// Single-view hypergraph spectral clustering, best view by inertia.
    Hsc,
}

/// What a repeat reseeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum RepeatScope {
    /// Only k-means; the embedding is computed once.
    Kmeans,
    /// The consensus initialization and k-means.
    Pipeline,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub method: Method,
    pub sigma: usize,
    /// Per-view σ, one entry per view; overrides `sigma` when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub view_sigma: Option<Vec<usize>>,
    pub lambda0: f64,
    pub max_outer: usize,
    pub epsilon: f64,
    pub obj_tol: f64,
    pub kmeans_restarts: usize,
    pub repeats: usize,
    pub repeat_scope: RepeatScope,
    pub seed: u64,
    /// Scale every feature column to [0, 1] before building hypergraphs.
    pub minmax: bool,
    #[serde(default)]
    pub rtr: TrustRegionConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            method: Method::Mhscg,
            sigma: DEFAULT_SIGMA,
            view_sigma: None,
            lambda0: 1.0,
            max_outer: 50,
            epsilon: 1e-5,
            obj_tol: 1e-6,
            kmeans_restarts: 30,
            repeats: 1,
            repeat_scope: RepeatScope::Kmeans,
            seed: 0,
            minmax: false,
            rtr: TrustRegionConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.repeats < 1 || self.kmeans_restarts < 1 {
            return Err(Error::InvalidArgument(
                "repeats and kmeans_restarts must be at least 1".into(),
            ));
        }
        if self.sigma < 1 || self.view_sigma.iter().flatten().any(|&s| s < 1) {
            return Err(Error::InvalidArgument("sigma must be at least 1".into()));
        }
        Ok(())
    }

    /// σ of each of `r` views.
    pub fn sigmas(&self, r: usize) -> Result<Vec<usize>> {
        match &self.view_sigma {
            None => Ok(vec![self.sigma; r]),
            Some(v) if v.len() == r => Ok(v.clone()),
            Some(v) => Err(Error::InvalidArgument(format!(
                "{} per-view sigma values given for {r} views",
                v.len()
            ))),
        }
    }

    pub fn solver_config(&self, k: usize, seed: u64) -> MhscgConfig {
        MhscgConfig {
            k,
            lambda0: self.lambda0,
            max_outer: self.max_outer,
            epsilon: self.epsilon,
            obj_tol: self.obj_tol,
            rtr: self.rtr.clone(),
            seed,
            ..MhscgConfig::new(k)
        }
    }

    /// Seed of repeat `i`; repeats are spaced by the restart count so no
    /// k-means restart seed is shared between repeats.
    pub fn repeat_seed(&self, i: usize) -> u64 {
        self.seed
            .wrapping_add((i as u64).wrapping_mul(self.kmeans_restarts as u64))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepeatOutcome {
    pub seed: u64,
    pub labels: Vec<usize>,
    pub inertia: f64,
    /// View chosen by the HSC baseline.
    pub view: Option<usize>,
    pub scores: Option<ClusteringScores>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Labels of the first repeat.
    pub labels: Vec<usize>,
    pub repeats: Vec<RepeatOutcome>,
    /// Convergence trace of the first repeat (MHSCG only).
    pub trace: Option<ConvergenceTrace>,
    pub metrics: Option<MetricReport>,
}

/// One `LaplacianPair` per view, built in parallel with `sigmas[l]` for view `l`.
pub fn view_laplacians(ds: &MultiViewDataset, sigmas: &[usize]) -> Result<Vec<LaplacianPair>> {
    if sigmas.len() != ds.views.len() {
        return Err(Error::InvalidArgument(format!(
            "{} sigma values for {} views",
            sigmas.len(),
            ds.views.len()
        )));
    }
    ds.views
        .par_iter()
        .zip(sigmas)
        .map(|(v, &sigma)| view_laplacian(v, sigma).map(|(_, lap)| lap))
        .collect()
}

fn mhscg_embedding(
    thetas: &[LaplacianPair],
    cfg: &RunConfig,
    k: usize,
    seed: u64,
) -> Result<(Embedding, ConvergenceTrace)> {
    let out = solver::run(thetas, &cfg.solver_config(k, seed))?;
    if !out.trace.converged {
        info!(
            "objective did not stabilize within {} iterations",
            cfg.max_outer
        );
    }
    Ok((row_normalize(out.consensus.as_matrix()), out.trace))
}

fn kmeans_config(cfg: &RunConfig, k: usize, seed: u64) -> KMeansConfig {
    KMeansConfig {
        restarts: cfg.kmeans_restarts,
        ..KMeansConfig::new(k, seed)
    }
}

/// Runs the configured method on `ds`, `cfg.repeats` times.
pub fn run(ds: &MultiViewDataset, cfg: &RunConfig) -> Result<RunOutput> {
    cfg.validate()?;
    ds.validate()?;
    let k = ds.k;
    if k > ds.n_samples() {
        return Err(Error::InvalidArgument(format!(
            "k = {k} exceeds the {} samples",
            ds.n_samples()
        )));
    }
    let scaled;
    let ds = if cfg.minmax {
        scaled = ds.min_max_scaled();
        &scaled
    } else {
        ds
    };
    let thetas = view_laplacians(ds, &cfg.sigmas(ds.views.len())?)?;

    let mut repeats = Vec::with_capacity(cfg.repeats);
    let mut first_trace = None;
    match cfg.method {
        Method::Mhscg => {
            let mut shared = None;
            for i in 0..cfg.repeats {
                let seed = cfg.repeat_seed(i);
                let embedding = match cfg.repeat_scope {
                    RepeatScope::Pipeline => {
                        let (e, trace) = mhscg_embedding(&thetas, cfg, k, seed)?;
                        first_trace.get_or_insert(trace);
                        e
                    }
                    RepeatScope::Kmeans => {
                        if shared.is_none() {
                            let (e, trace) = mhscg_embedding(&thetas, cfg, k, cfg.seed)?;
                            first_trace = Some(trace);
                            shared = Some(e);
                        }
                        shared.clone().expect("embedding computed above")
                    }
                };
                let res = best_of_restarts(embedding.as_matrix(), &kmeans_config(cfg, k, seed))?;
                repeats.push(RepeatOutcome {
                    seed,
                    labels: res.labels,
                    inertia: res.inertia,
                    view: None,
                    scores: None,
                });
            }
        }
        Method::Hsc => {
            // the single-view embeddings carry no randomness
            let embeddings = thetas
                .par_iter()
                .map(|t| dominant_subspace(&t.theta, k).map(|f| row_normalize(f.as_matrix())))
                .collect::<Result<Vec<_>>>()?;
            for i in 0..cfg.repeats {
                let seed = cfg.repeat_seed(i);
                let kcfg = kmeans_config(cfg, k, seed);
                let per_view = embeddings
                    .iter()
                    .map(|e| best_of_restarts(e.as_matrix(), &kcfg))
                    .collect::<Result<Vec<_>>>()?;
                let (view, best) = per_view
                    .into_iter()
                    .enumerate()
                    .min_by(|a, b| a.1.inertia.total_cmp(&b.1.inertia))
                    .expect("dataset has at least one view");
                repeats.push(RepeatOutcome {
                    seed,
                    labels: best.labels,
                    inertia: best.inertia,
                    view: Some(view),
                    scores: None,
                });
            }
        }
    }

    let metrics = match &ds.labels {
        Some(truth) => {
            for rep in &mut repeats {
                rep.scores = Some(evaluate(&rep.labels, truth)?);
            }
            let runs: Vec<_> = repeats.iter().filter_map(|r| r.scores).collect();
            Some(MetricReport::from_runs(&runs)?)
        }
        None => None,
    };

    Ok(RunOutput {
        labels: repeats[0].labels.clone(),
        repeats,
        trace: first_trace,
        metrics,
    })
}
