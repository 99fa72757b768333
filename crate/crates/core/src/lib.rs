//! Multi-view hypergraph spectral clustering on the Grassmannian manifold.
//!
//! The pipeline learns one sparse hypergraph per view, couples the per-view
//! spectral embeddings through a consensus subspace, and solves every
//! subproblem with a Riemannian trust-region method on 𝒢(k, n). The
//! consensus embedding is row-normalized and clustered with k-means.
//!
//! Modules, bottom-up:
//!
//! * [`dataset`]: multi-view matrices, manifests, label files, synthetic data
//! * [`hypergraph`]: sparse similarity, incidence matrix, hypergraph Laplacian
//! * [`manifold`]: Grassmann geometry and the trust-region maximizer
//! * [`solver`]: the co-regularized multi-view objective and alternating loop
//! * [`cluster`]: row normalization and k-means++ with restarts
//! * [`metrics`]: ACC / NMI / F-score / ARI and Friedman/Nemenyi statistics
//! * [`pipeline`]: end-to-end runs shared by the CLI and the C API
//! * [`cli`]: file-producing commands behind the `mhscg` binary

pub mod cli;
pub mod cluster;
pub mod dataset;
pub mod error;
pub mod hypergraph;
pub mod manifold;
pub mod metrics;
pub mod pipeline;
pub mod solver;

pub use error::{Error, Result};

/// Dense real matrix used throughout the crate.
pub type Matrix = nalgebra::DMatrix<f64>;
/// Dense real vector used throughout the crate.
pub type Vector = nalgebra::DVector<f64>;
