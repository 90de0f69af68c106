//! Quadratically penalized comparison solver with discrepancy-tuned weight.
//!
//! `x(lambda2) = argmin ||Kx - y||^2 + lambda2 ||x||^2` solves the normal
//! equations `(K^T K + lambda2 I) x = K^T y`, handled by conjugate gradients
//! without forming the Gram matrix. The residual `||K x(lambda2) - y||` is
//! strictly increasing in lambda2, so the weight meeting a residual target is
//! found by a geometric bracket expansion followed by bisection with secant
//! acceleration.

use nalgebra::{DMatrix, DVector};

use super::spectral_norm_sq;
use crate::{Error, Result};

/// Iteration controls for [`ridge_discrepancy`].
#[derive(Debug, Clone, Copy)]
pub struct RidgeOptions {
    /// CG stop: normal-equation residual relative to `||K^T y||`.
    pub cg_tol: f64,
    pub cg_max_iter: usize,
    /// Outer stop: `| ||Kx - y|| - target | <= disc_tol * ||y||`.
    pub disc_tol: f64,
    pub max_outer: usize,
}

impl Default for RidgeOptions {
    fn default() -> Self {
        Self { cg_tol: 1e-10, cg_max_iter: 4000, disc_tol: 1e-6, max_outer: 120 }
    }
}

/// Result of a discrepancy-tuned ridge solve.
#[derive(Debug, Clone)]
pub struct RidgeSolution {
    pub x: DVector<f64>,
    pub lambda2: f64,
    pub residual_norm: f64,
    /// Total conjugate-gradient iterations across all outer steps.
    pub cg_iterations: usize,
}

/// Conjugate gradients on `(K^T K + lambda2 I) x = K^T y`, warm-started at
/// `x0`. Returns the solution and the iteration count.
fn cg_normal(
    k: &DMatrix<f64>,
    kt: &DMatrix<f64>,
    b: &DVector<f64>,
    lambda2: f64,
    x0: &DVector<f64>,
    tol: f64,
    max_iter: usize,
) -> (DVector<f64>, usize) {
    let n = k.ncols();
    let m = k.nrows();
    let bnorm = b.norm().max(f64::MIN_POSITIVE);

    let mut kx = DVector::<f64>::zeros(m);
    let apply = |v: &DVector<f64>, kv_buf: &mut DVector<f64>| -> DVector<f64> {
        kv_buf.gemv(1.0, k, v, 0.0);
        let mut out = DVector::<f64>::zeros(n);
        out.gemv(1.0, kt, kv_buf, 0.0);
        out.axpy(lambda2, v, 1.0);
        out
    };

    let mut x = x0.clone();
    let mut r = b - apply(&x, &mut kx);
    let mut p = r.clone();
    let mut rs = r.norm_squared();
    let mut iters = 0usize;

    while iters < max_iter && rs.sqrt() > tol * bnorm {
        let ap = apply(&p, &mut kx);
        let denom = p.dot(&ap);
        if denom <= 0.0 {
            break; // numerically semi-definite; accept current iterate
        }
        let alpha = rs / denom;
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &ap, 1.0);
        let rs_new = r.norm_squared();
        p = &r + &p * (rs_new / rs);
        rs = rs_new;
        iters += 1;
    }
    (x, iters)
}

/// Find `lambda2 > 0` such that `||K x(lambda2) - y||` equals
/// `target_residual` to `disc_tol * ||y||`, where `x(lambda2)` minimizes the
/// ridge functional.
///
/// Errors: `TargetUnreachable`-style failures are reported as
/// [`Error::InvalidTarget`] when the target lies at or below the unpenalized
/// least-squares floor, or at or above `||y||`.
pub fn ridge_discrepancy(
    k: &DMatrix<f64>,
    y: &DVector<f64>,
    target_residual: f64,
    opts: &RidgeOptions,
) -> Result<RidgeSolution> {
    let m = k.nrows();
    let n = k.ncols();
    if y.len() != m {
        return Err(Error::InvalidDimension(format!(
            "y has length {}, expected {m}",
            y.len()
        )));
    }
    let ynorm = y.norm();
    if !(target_residual < ynorm) {
        return Err(Error::InvalidTarget(format!(
            "target {target_residual} must lie below ||y|| = {ynorm}"
        )));
    }

    let kt = k.transpose();
    let b = &kt * y;
    let mut total_cg = 0usize;

    // Unpenalized floor: residual of the least-squares solution.
    let zeros = DVector::<f64>::zeros(n);
    let (x_ls, it) = cg_normal(k, &kt, &b, 0.0, &zeros, opts.cg_tol, opts.cg_max_iter.max(4 * n));
    total_cg += it;
    let r_min = (k * &x_ls - y).norm();
    if target_residual <= r_min {
        return Err(Error::InvalidTarget(format!(
            "target {target_residual} is at or below the least-squares floor {r_min}"
        )));
    }

    let norm_sq = spectral_norm_sq(k);
    let res_at = |lambda2: f64, x0: &DVector<f64>, total: &mut usize| -> (DVector<f64>, f64) {
        let (x, it) = cg_normal(k, &kt, &b, lambda2, x0, opts.cg_tol, opts.cg_max_iter);
        *total += it;
        let res = (k * &x - y).norm();
        (x, res)
    };

    // Bracket the target: residual is increasing in lambda2.
    let mut lo = 1e-12 * norm_sq.max(f64::MIN_POSITIVE);
    let mut hi = norm_sq.max(f64::MIN_POSITIVE);
    let (mut x_lo, mut res_lo) = res_at(lo, &x_ls, &mut total_cg);
    let mut guard = 0;
    while res_lo > target_residual && guard < 60 {
        lo /= 16.0;
        let out = res_at(lo, &x_lo, &mut total_cg);
        x_lo = out.0;
        res_lo = out.1;
        guard += 1;
    }
    let (mut x_hi, mut res_hi) = res_at(hi, &zeros, &mut total_cg);
    guard = 0;
    while res_hi < target_residual && guard < 60 {
        hi *= 16.0;
        let out = res_at(hi, &x_hi, &mut total_cg);
        x_hi = out.0;
        res_hi = out.1;
        guard += 1;
    }
    if res_lo > target_residual || res_hi < target_residual {
        return Err(Error::Numerical(
            "failed to bracket the discrepancy target for the ridge weight".into(),
        ));
    }

    // Bisection with a secant step on log(lambda2); the residual is smooth
    // and monotone, so this converges quickly once the bracket is tight.
    let tol = opts.disc_tol * ynorm;
    let mut best: Option<(DVector<f64>, f64, f64)> = None;
    for iter in 0..opts.max_outer {
        // Secant proposal in log space, safeguarded by the bracket midpoint.
        let (llo, lhi) = (lo.ln(), hi.ln());
        let mut proposal = 0.5 * (llo + lhi);
        if res_hi > res_lo {
            let frac = (target_residual - res_lo) / (res_hi - res_lo);
            if frac.is_finite() && (0.05..=0.95).contains(&frac) && iter % 3 != 2 {
                proposal = llo + frac * (lhi - llo);
            }
        }
        let mid = proposal.exp();
        let warm = if (mid - lo).abs() < (hi - mid).abs() { &x_lo } else { &x_hi };
        let (x_mid, res_mid) = res_at(mid, warm, &mut total_cg);

        let err = (res_mid - target_residual).abs();
        if best.as_ref().map(|(_, _, e)| err < *e).unwrap_or(true) {
            best = Some((x_mid.clone(), mid, err));
        }
        if err <= tol {
            break;
        }
        if res_mid < target_residual {
            lo = mid;
            x_lo = x_mid;
            res_lo = res_mid;
        } else {
            hi = mid;
            x_hi = x_mid;
            res_hi = res_mid;
        }
    }

    let (x, lambda2, err) = best.expect("at least one outer iterate");
    if err > tol {
        return Err(Error::Numerical(format!(
            "discrepancy root-finding stalled: |residual - target| = {err:.3e} > {tol:.3e}"
        )));
    }
    let residual_norm = (k * &x - y).norm();
    Ok(RidgeSolution { x, lambda2, residual_norm, cg_iterations: total_cg })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    fn random_problem(m: usize, n: usize, seed: u64) -> (DMatrix<f64>, DVector<f64>) {
        let mut rng = crate::rng::stream(seed);
        let k = DMatrix::<f64>::from_fn(m, n, |_, _| StandardNormal.sample(&mut rng));
        let y = DVector::<f64>::from_fn(m, |_, _| StandardNormal.sample(&mut rng));
        (k, y)
    }

    #[test]
    fn identity_case_has_closed_form() {
        // K = I, y = (2, 0), target 1 => lambda2 = 1, x = (1, 0).
        let k = DMatrix::<f64>::identity(2, 2);
        let y = DVector::from_vec(vec![2.0, 0.0]);
        let sol = ridge_discrepancy(&k, &y, 1.0, &RidgeOptions::default()).unwrap();
        assert!((sol.lambda2 - 1.0).abs() <= 1e-4, "lambda2 = {}", sol.lambda2);
        assert!((sol.x[0] - 1.0).abs() <= 1e-6);
        assert!(sol.x[1].abs() <= 1e-12);
        assert!((sol.residual_norm - 1.0).abs() <= 1e-6 * y.norm());
    }

    #[test]
    fn residual_matches_target_on_random_instances() {
        let (k, y) = random_problem(30, 60, 1);
        for frac in [0.3, 0.6, 0.9] {
            let rt = frac * y.norm();
            let sol = ridge_discrepancy(&k, &y, rt, &RidgeOptions::default()).unwrap();
            assert!(
                (sol.residual_norm - rt).abs() <= 1e-6 * y.norm(),
                "frac {frac}: residual {} target {rt}",
                sol.residual_norm
            );
            // Normal-equation residual certificate.
            let lhs = k.transpose() * (&k * &sol.x) + &sol.x * sol.lambda2;
            let rhs = k.transpose() * &y;
            assert!((lhs - &rhs).norm() <= 1e-8 * rhs.norm());
        }
    }

    #[test]
    fn near_data_norm_target_shrinks_solution() {
        let (k, y) = random_problem(20, 15, 2);
        let sol = ridge_discrepancy(&k, &y, 0.999 * y.norm(), &RidgeOptions::default()).unwrap();
        let ls = ridge_discrepancy(&k, &y, 0.9 * y.norm(), &RidgeOptions::default()).unwrap();
        assert!(sol.x.norm() < 0.05 * ls.x.norm());
        assert!(sol.lambda2 > 100.0 * ls.lambda2);
    }

    #[test]
    fn floor_and_ceiling_targets_are_rejected() {
        let (k, y) = random_problem(30, 5, 3);
        let kt = k.transpose();
        let gram = &kt * &k;
        let x_ls = gram.lu().solve(&(&kt * &y)).unwrap();
        let r_min = (&k * x_ls - &y).norm();
        assert!(ridge_discrepancy(&k, &y, r_min * 0.5, &RidgeOptions::default()).is_err());
        assert!(ridge_discrepancy(&k, &y, y.norm() * 1.1, &RidgeOptions::default()).is_err());
    }

    #[test]
    fn matches_dense_normal_solve() {
        let (k, y) = random_problem(25, 40, 4);
        let rt = 0.5 * y.norm();
        let sol = ridge_discrepancy(&k, &y, rt, &RidgeOptions::default()).unwrap();
        let kt = k.transpose();
        let mut gram = &kt * &k;
        for i in 0..40 {
            gram[(i, i)] += sol.lambda2;
        }
        let direct = gram.lu().solve(&(&kt * &y)).unwrap();
        assert!((&sol.x - &direct).amax() <= 1e-7 * direct.amax().max(1.0));
    }
}
