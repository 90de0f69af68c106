//! Solvers for the penalized least-squares problems.
//!
//! Three routes into the same data:
//!
//! * [`lasso_path`] — exact piecewise-linear homotopy for
//!   `min ||Kx - y||^2 + 2*lambda*||x||_1`, run until a residual target
//!   (discrepancy principle) or a minimum lambda is reached;
//! * [`fista`] — accelerated proximal-gradient iteration for the same
//!   functional at a fixed lambda, for problems too large for the path;
//! * [`ridge_discrepancy`] — the quadratic-penalty comparison,
//!   `min ||Kx - y||^2 + lambda2*||x||^2`, with lambda2 tuned by monotone
//!   root-finding so the residual matches a target, inner solves by
//!   conjugate gradients on the normal equations.

mod fista;
mod homotopy;
mod ridge;

pub use fista::{fista, fista_discrepancy, fista_warm, spectral_norm_sq, FistaOptions};
pub use homotopy::{lasso_path, LassoPath, PathBreakpoint, StopRule};
pub use ridge::{ridge_discrepancy, RidgeOptions, RidgeSolution};

use nalgebra::{DMatrix, DVector};

/// How a solve ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SolveStatus {
    /// Postconditions of the producing operation hold.
    Converged,
    /// Requested residual is below the attainable floor; the best point
    /// reached is returned.
    TargetUnreachable,
    /// Iteration or event budget exhausted before the tolerance was met.
    MaxIterations,
    /// The active Gram matrix went numerically singular along the path; a
    /// truncated-SVD minimizer is returned.
    DegeneratePath,
}

impl SolveStatus {
    pub fn label(&self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::TargetUnreachable => "target-unreachable",
            SolveStatus::MaxIterations => "max-iterations",
            SolveStatus::DegeneratePath => "degenerate-path",
        }
    }
}

/// A recovered vector with the lambda it solves for, its residual norm, how
/// the solve ended, and a work counter (path events or iterations).
#[derive(Debug, Clone)]
pub struct Solution {
    pub x: DVector<f64>,
    pub lambda: f64,
    pub residual_norm: f64,
    pub status: SolveStatus,
    pub work: usize,
}

/// Elementwise soft thresholding: `out_i = sign(v_i) * max(|v_i| - tau, 0)`.
pub fn soft_threshold(v: &DVector<f64>, tau: f64) -> DVector<f64> {
    debug_assert!(tau >= 0.0);
    v.map(|x| soft_threshold_scalar(x, tau))
}

#[inline]
pub fn soft_threshold_scalar(x: f64, tau: f64) -> f64 {
    if x > tau {
        x - tau
    } else if x < -tau {
        x + tau
    } else {
        0.0
    }
}

/// The penalized objective `||Kx - y||^2 + 2*lambda*||x||_1`.
pub fn lasso_objective(k: &DMatrix<f64>, y: &DVector<f64>, x: &DVector<f64>, lambda: f64) -> f64 {
    let r = k * x - y;
    r.norm_squared() + 2.0 * lambda * x.iter().map(|v| v.abs()).sum::<f64>()
}

/// KKT certificate for the l1 problem at `(x, lambda)`.
///
/// Returns `(max_ratio, max_active_dev)` where `max_ratio` is
/// `max_i |K^T (y - Kx)|_i / lambda` (should be <= 1 + tol) and
/// `max_active_dev` is the largest relative deviation of `K_i^T (y - Kx)`
/// from `lambda * sign(x_i)` over the support of `x`.
pub fn kkt_certificate(
    k: &DMatrix<f64>,
    y: &DVector<f64>,
    x: &DVector<f64>,
    lambda: f64,
) -> (f64, f64) {
    let r = y - k * x;
    let c = k.transpose() * r;
    let scale = lambda.max(f64::MIN_POSITIVE);
    let max_ratio = c.iter().map(|v| v.abs()).fold(0.0f64, f64::max) / scale;
    let mut max_active_dev = 0.0f64;
    for i in 0..x.len() {
        if x[i] != 0.0 {
            let want = lambda * x[i].signum();
            max_active_dev = max_active_dev.max((c[i] - want).abs() / scale);
        }
    }
    (max_ratio, max_active_dev)
}
