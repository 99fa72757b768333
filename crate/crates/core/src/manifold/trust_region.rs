//! Riemannian trust-region (RTR) with a Steihaug–Toint truncated CG inner
//! solver, specialized to `f(X) = tr(XᵀMX)` on 𝒢(k, n).
//!
//! The solver minimizes the cost `c(X) = −f(X)`; every value it reports is
//! in terms of `f`.

use serde::{Deserialize, Serialize};

use super::{project, retract, GrassmannPoint, TangentVector};
use crate::error::{Error, Result};
use crate::Matrix;

/// `f(X) = tr(XᵀMX)` for a symmetric `M`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticTraceObjective {
    m: Matrix,
}

impl QuadraticTraceObjective {
    pub fn new(m: Matrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::shape("square M", format!("{}×{}", m.nrows(), m.ncols())));
        }
        let scale = m.amax().max(1.0);
        let asym = (&m - m.transpose()).amax();
        if !(asym <= 1e-10 * scale) {
            return Err(Error::InvalidArgument(format!(
                "objective matrix is not symmetric (max |M − Mᵀ| = {asym:.3e})"
            )));
        }
        Ok(Self { m })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.m
    }

    pub fn n(&self) -> usize {
        self.m.nrows()
    }

    pub fn value(&self, x: &GrassmannPoint) -> f64 {
        let x = x.as_matrix();
        x.dot(&(&self.m * x))
    }

    fn check(&self, x: &GrassmannPoint) -> Result<()> {
        if x.n() != self.n() {
            return Err(Error::shape(
                format!("point with {} rows", self.n()),
                format!("{} rows", x.n()),
            ));
        }
        Ok(())
    }
}

/// `grad f(X) = 2 (I − XXᵀ) M X`.
pub fn riemannian_grad(x: &GrassmannPoint, obj: &QuadraticTraceObjective) -> Result<TangentVector> {
    obj.check(x)?;
    let mx = obj.matrix() * x.as_matrix();
    Ok(TangentVector(project(x.as_matrix(), &mx) * 2.0))
}

/// `Hess f(X)[ξ] = 2 P_X(Mξ − ξ XᵀMX)`.
pub fn riemannian_hess_apply(
    x: &GrassmannPoint,
    xi: &TangentVector,
    obj: &QuadraticTraceObjective,
) -> Result<TangentVector> {
    obj.check(x)?;
    x.check_shape(xi.as_matrix())?;
    let xm = x.as_matrix();
    let s = xm.transpose() * (obj.matrix() * xm);
    Ok(TangentVector(hess_with(xm, &s, obj.matrix(), xi.as_matrix())))
}

fn hess_with(x: &Matrix, s: &Matrix, m: &Matrix, xi: &Matrix) -> Matrix {
    project(x, &(m * xi - xi * s)) * 2.0
}

/// Trust-region parameters. Radii and inner-iteration cap left as `None`
/// are derived from the problem size: `Δ̄ = √k`, `Δ₀ = Δ̄/8`,
/// `max_inner = k(n − k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrustRegionConfig {
    pub delta_bar: Option<f64>,
    pub delta0: Option<f64>,
    pub rho_prime: f64,
    pub max_outer: usize,
    pub grad_tol: f64,
    pub max_inner: Option<usize>,
    pub kappa: f64,
    pub theta: f64,
}

impl Default for TrustRegionConfig {
    fn default() -> Self {
        Self {
            delta_bar: None,
            delta0: None,
            rho_prime: 0.1,
            max_outer: 200,
            grad_tol: 1e-7,
            max_inner: None,
            kappa: 0.1,
            theta: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Resolved {
    delta_bar: f64,
    delta0: f64,
    max_inner: usize,
}

impl TrustRegionConfig {
    fn resolve(&self, n: usize, k: usize) -> Result<Resolved> {
        let delta_bar = self.delta_bar.unwrap_or((k as f64).sqrt());
        let delta0 = self.delta0.unwrap_or(delta_bar / 8.0);
        let max_inner = self.max_inner.unwrap_or(k * (n - k)).max(1);
        if !(delta0 > 0.0 && delta0 <= delta_bar) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < delta0 ≤ delta_bar, got {delta0} and {delta_bar}"
            )));
        }
        if !(self.rho_prime > 0.0 && self.rho_prime < 0.25) {
            return Err(Error::InvalidArgument(format!(
                "rho_prime must lie in (0, 1/4), got {}",
                self.rho_prime
            )));
        }
        if !(self.grad_tol > 0.0 && self.kappa > 0.0 && self.theta > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        Ok(Resolved {
            delta_bar,
            delta0,
            max_inner,
        })
    }

    pub fn validate(&self, n: usize, k: usize) -> Result<()> {
        self.resolve(n, k).map(|_| ())
    }
}

/// Why the inner solver stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TcgStop {
    NegativeCurvature,
    Boundary,
    Tolerance,
    MaxInner,
}

#[derive(Debug, Clone)]
pub struct TcgOutcome {
    pub step: TangentVector,
    pub reason: TcgStop,
    /// `−m(η)` for the cost model `m(η) = ⟨g, η⟩ + ½⟨Hη, η⟩`.
    pub model_decrease: f64,
    pub iterations: usize,
}

/// Steihaug–Toint truncated CG on the cost model around `X`.
///
/// `cost_grad` is the Riemannian gradient of the cost `−f`, i.e. the
/// negated [`riemannian_grad`]. The returned step stays inside the ball of
/// radius `radius` and decreases the model at least as much as the Cauchy
/// point.
pub fn truncated_cg(
    x: &GrassmannPoint,
    cost_grad: &TangentVector,
    obj: &QuadraticTraceObjective,
    radius: f64,
    cfg: &TrustRegionConfig,
) -> Result<TcgOutcome> {
    obj.check(x)?;
    x.check_shape(cost_grad.as_matrix())?;
    if !(radius > 0.0) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {radius}")));
    }
    let r = cfg.resolve(x.n(), x.k())?;
    let xm = x.as_matrix();
    let s = xm.transpose() * (obj.matrix() * xm);
    Ok(tcg(xm, &s, obj.matrix(), cost_grad.as_matrix(), radius, cfg, r.max_inner))
}

fn tcg(
    x: &Matrix,
    s: &Matrix,
    m: &Matrix,
    grad: &Matrix,
    radius: f64,
    cfg: &TrustRegionConfig,
    max_inner: usize,
) -> TcgOutcome {
    // cost Hessian = −Hess f
    let hess = |v: &Matrix| -hess_with(x, s, m, v);
    let (n, k) = x.shape();

    let mut eta = Matrix::zeros(n, k);
    let mut residual = grad.clone();
    let mut r_r = residual.norm_squared();
    let norm_r0 = r_r.sqrt();
    if norm_r0 == 0.0 || !norm_r0.is_finite() {
        return TcgOutcome {
            step: TangentVector(eta),
            reason: TcgStop::Tolerance,
            model_decrease: 0.0,
            iterations: 0,
        };
    }
    let stop_at = norm_r0 * norm_r0.powf(cfg.theta).min(cfg.kappa);

    let mut delta = -&residual;
    let mut e_e = 0.0;
    let mut reason = TcgStop::MaxInner;
    let mut iterations = 0;
    let radius_sq = radius * radius;

    for _ in 0..max_inner {
        iterations += 1;
        let h_delta = hess(&delta);
        let d_hd = delta.dot(&h_delta);
        let e_d = eta.dot(&delta);
        let d_d = delta.norm_squared();
        let alpha = r_r / d_hd;
        let e_e_next = e_e + 2.0 * alpha * e_d + alpha * alpha * d_d;

        if d_hd <= 0.0 || e_e_next >= radius_sq {
            let tau = (-e_d + (e_d * e_d + d_d * (radius_sq - e_e)).max(0.0).sqrt()) / d_d;
            eta += &delta * tau;
            reason = if d_hd <= 0.0 {
                TcgStop::NegativeCurvature
            } else {
                TcgStop::Boundary
            };
            break;
        }

        eta += &delta * alpha;
        e_e = e_e_next;
        residual += &h_delta * alpha;
        residual = project(x, &residual);
        let r_r_next = residual.norm_squared();
        if r_r_next.sqrt() <= stop_at {
            reason = TcgStop::Tolerance;
            break;
        }
        let beta = r_r_next / r_r;
        r_r = r_r_next;
        delta = project(x, &(&delta * beta - &residual));
    }

    let model = grad.dot(&eta) + 0.5 * eta.dot(&hess(&eta));
    TcgOutcome {
        step: TangentVector(eta),
        reason,
        model_decrease: -model,
        iterations,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RtrStatus {
    Converged,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct RtrOutcome {
    pub point: GrassmannPoint,
    /// `f` at the returned point.
    pub value: f64,
    pub grad_norm: f64,
    pub status: RtrStatus,
    /// Outer iterations performed (accepted or not).
    pub iterations: usize,
    /// `f` at the start and after every accepted step.
    pub values: Vec<f64>,
}

/// `f(span(X + ξ)) − f(X)` for a tangent step ξ, without subtracting two
/// O(|f|) numbers: with `G = I + ξᵀξ` and `E = XᵀMξ + ξᵀMX + ξᵀMξ` it equals
/// `tr(G⁻¹ (E − ξᵀξ S))`, `S = XᵀMX`. `half_grad` is `P_X(MX)`.
fn improvement(half_grad: &Matrix, s: &Matrix, m: &Matrix, xi: &Matrix) -> f64 {
    let k = xi.ncols();
    let gram = xi.transpose() * xi;
    let m_xi = m * xi;
    // XᵀMξ = (P_X MX)ᵀξ for tangent ξ; avoids the S·Xᵀξ round-off term
    let cross = half_grad.transpose() * xi;
    let e = &cross + cross.transpose() + xi.transpose() * &m_xi;
    let g = Matrix::identity(k, k) + &gram;
    let rhs = e - gram * s;
    match g.cholesky() {
        Some(ch) => ch.solve(&rhs).trace(),
        None => f64::NEG_INFINITY,
    }
}

/// Maximizes `tr(XᵀMX)` over 𝒢(k, n) starting from `x0`.
///
/// Steps whose ratio of actual to predicted improvement falls below
/// `rho_prime` are rejected, so the objective never decreases. Stops when
/// the gradient norm is at most `grad_tol` or after `max_outer` iterations.
pub fn rtr_maximize(
    obj: &QuadraticTraceObjective,
    x0: &GrassmannPoint,
    cfg: &TrustRegionConfig,
) -> Result<RtrOutcome> {
    obj.check(x0)?;
    let resolved = cfg.resolve(x0.n(), x0.k())?;
    let m = obj.matrix();

    let mut x = x0.clone();
    let mut mx = m * x.as_matrix();
    let mut s = x.as_matrix().transpose() * &mx;
    let mut f = s.trace();
    let mut grad = project(x.as_matrix(), &mx) * 2.0;
    let mut grad_norm = grad.norm();
    let mut radius = resolved.delta0;
    let mut values = vec![f];
    let mut iterations = 0;

    while grad_norm > cfg.grad_tol && iterations < cfg.max_outer {
        iterations += 1;
        let cost_grad = -&grad;
        let inner = tcg(x.as_matrix(), &s, m, &cost_grad, radius, cfg, resolved.max_inner);

        // drop the round-off normal component tCG accumulates
        let step = TangentVector(project(x.as_matrix(), inner.step.as_matrix()));
        let candidate = match retract(&x, &step) {
            Ok(p) => p,
            Err(_) => {
                radius *= 0.25;
                continue;
            }
        };
        let mx_new = m * candidate.as_matrix();
        let actual = improvement(&(&grad * 0.5), &s, m, step.as_matrix());
        let f_new = f + actual;

        let (accept, rho) = if inner.model_decrease <= 0.0 {
            let ok = actual > 0.0;
            (ok, if ok { 1.0 } else { 0.0 })
        } else {
            let rho = actual / inner.model_decrease;
            (rho > cfg.rho_prime, rho)
        };

        let at_boundary = matches!(inner.reason, TcgStop::Boundary | TcgStop::NegativeCurvature);
        if rho < 0.25 {
            radius *= 0.25;
        } else if rho > 0.75 && at_boundary {
            radius = (2.0 * radius).min(resolved.delta_bar);
        }

        if accept {
            x = candidate;
            mx = mx_new;
            s = x.as_matrix().transpose() * &mx;
            f = f_new;
            grad = project(x.as_matrix(), &mx) * 2.0;
            grad_norm = grad.norm();
            values.push(f);
        }
        if radius < f64::EPSILON * resolved.delta_bar {
            break;
        }
    }

    let status = if grad_norm <= cfg.grad_tol {
        RtrStatus::Converged
    } else {
        RtrStatus::MaxIterations
    };
    Ok(RtrOutcome {
        point: x,
        value: f,
        grad_norm,
        status,
        iterations,
        values,
    })
}
