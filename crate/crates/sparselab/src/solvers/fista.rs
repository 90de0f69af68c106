//! Fast iterative soft-thresholding for `||Kx - y||^2 + 2*lambda*||x||_1`.

use nalgebra::{DMatrix, DVector};

use super::{soft_threshold_scalar, SolveStatus, Solution};
use crate::{Error, Result};

/// Iteration controls for [`fista`].
#[derive(Debug, Clone, Copy)]
pub struct FistaOptions {
    pub max_iter: usize,
    /// Stop when the relative iterate change drops below this.
    pub tol: f64,
}

impl Default for FistaOptions {
    fn default() -> Self {
        Self { max_iter: 20_000, tol: 1e-10 }
    }
}

/// Squared spectral norm `||K||^2` by power iteration on `K^T K`, converged
/// to 1e-6 relative and inflated by a small safety factor so it upper-bounds
/// the true value. Deterministic: the start vector comes from a fixed seed.
pub fn spectral_norm_sq(k: &DMatrix<f64>) -> f64 {
    let n = k.ncols();
    if n == 0 || k.nrows() == 0 {
        return 0.0;
    }
    let mut rng = crate::rng::stream(0x5eec7_0a1);
    use rand_distr::{Distribution, StandardNormal};
    let mut v = DVector::<f64>::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
    let nv = v.norm();
    if nv == 0.0 {
        return 0.0;
    }
    v /= nv;
    let mut est = 0.0f64;
    for _ in 0..10_000 {
        let kv = k * &v;
        let mut next = k.transpose() * kv;
        let norm = next.norm();
        if norm == 0.0 {
            return 0.0;
        }
        next /= norm;
        let new_est = (k * &next).norm_squared();
        let done = (new_est - est).abs() <= 1e-6 * new_est.max(f64::MIN_POSITIVE);
        est = new_est;
        v = next;
        if done {
            break;
        }
    }
    est * (1.0 + 1e-4)
}

/// FISTA from a cold start (`x = 0`).
pub fn fista(
    k: &DMatrix<f64>,
    y: &DVector<f64>,
    lambda: f64,
    opts: &FistaOptions,
) -> Result<Solution> {
    let x0 = DVector::zeros(k.ncols());
    let l = spectral_norm_sq(k);
    fista_warm(k, y, lambda, &x0, l, opts)
}

/// FISTA from a warm start with a precomputed step bound `l >= ||K||^2`.
///
/// Iterates `x+ = soft(z - K^T(Kz - y)/l, lambda/l)` with Nesterov momentum
/// on `z` and gradient-based adaptive restart (reset the momentum whenever
/// the update direction turns against the last step); stops when the
/// relative iterate change falls below `opts.tol`.
pub fn fista_warm(
    k: &DMatrix<f64>,
    y: &DVector<f64>,
    lambda: f64,
    x0: &DVector<f64>,
    l: f64,
    opts: &FistaOptions,
) -> Result<Solution> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidTarget(format!("lambda must be positive, got {lambda}")));
    }
    if !(l > 0.0) {
        return Err(Error::Numerical("step bound must be positive (zero operator?)".into()));
    }
    let m = k.nrows();
    let n = k.ncols();
    if y.len() != m || x0.len() != n {
        return Err(Error::InvalidDimension("fista: mismatched shapes".into()));
    }

    let kt = k.transpose();
    let step = 1.0 / l;
    let tau = lambda / l;

    let mut x = x0.clone();
    let mut z = x.clone();
    let mut t = 1.0f64;
    let mut kz = DVector::<f64>::zeros(m);
    let mut grad = DVector::<f64>::zeros(n);

    for iter in 1..=opts.max_iter {
        // grad = K^T (K z - y)
        kz.gemv(1.0, k, &z, 0.0);
        kz -= y;
        grad.gemv(1.0, &kt, &kz, 0.0);

        let mut x_new = DVector::<f64>::zeros(n);
        for i in 0..n {
            x_new[i] = soft_threshold_scalar(z[i] - step * grad[i], tau);
        }

        // Adaptive restart: momentum has overshot when the implied update
        // direction opposes the actual step.
        let mut overshoot = 0.0;
        for i in 0..n {
            overshoot += (z[i] - x_new[i]) * (x_new[i] - x[i]);
        }
        let (t_new, beta) = if overshoot > 0.0 {
            (1.0, 0.0)
        } else {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            (t_next, (t - 1.0) / t_next)
        };
        z = &x_new + (&x_new - &x) * beta;

        let dx = (&x_new - &x).norm();
        let scale = x_new.norm().max(1e-300);
        x = x_new;
        t = t_new;

        if dx <= opts.tol * scale {
            let residual_norm = (k * &x - y).norm();
            return Ok(Solution {
                x,
                lambda,
                residual_norm,
                status: SolveStatus::Converged,
                work: iter,
            });
        }
    }
    let residual_norm = (k * &x - y).norm();
    Ok(Solution {
        x,
        lambda,
        residual_norm,
        status: SolveStatus::MaxIterations,
        work: opts.max_iter,
    })
}

/// Tune `lambda` so the FISTA solution meets a residual target (discrepancy
/// principle), for problems too large for the homotopy path.
///
/// The residual `||K x(lambda) - y||` is nondecreasing in lambda, so the
/// target is bracketed by walking lambda down from `||K^T y||_inf` with
/// warm-started solves, then closed in by a safeguarded secant/bisection
/// iteration. Returns `MaxIterations` status if the outer loop stalls before
/// reaching `|residual - target| <= disc_tol * ||y||`.
pub fn fista_discrepancy(
    k: &DMatrix<f64>,
    y: &DVector<f64>,
    target_residual: f64,
    disc_tol: f64,
    opts: &FistaOptions,
) -> Result<Solution> {
    let ynorm = y.norm();
    if !(0.0..=ynorm * (1.0 + 1e-12)).contains(&target_residual) {
        return Err(Error::InvalidTarget(format!(
            "residual target {target_residual} outside [0, ||y||] = [0, {ynorm}]"
        )));
    }
    let n = k.ncols();
    let lambda0 = (k.transpose() * y).amax();
    if target_residual >= ynorm * (1.0 - disc_tol) || lambda0 == 0.0 {
        return Ok(Solution {
            x: DVector::zeros(n),
            lambda: lambda0,
            residual_norm: ynorm,
            status: SolveStatus::Converged,
            work: 0,
        });
    }

    let l = spectral_norm_sq(k);
    let tol = disc_tol * ynorm;
    let mut work = 0usize;

    // Walk down from lambda0 until the residual drops below the target.
    let mut hi = lambda0;
    let mut res_hi = ynorm;
    let mut x_hi = DVector::<f64>::zeros(n);
    let mut lo = lambda0 / 2.0;
    let mut x_lo = x_hi.clone();
    let mut res_lo;
    loop {
        let sol = fista_warm(k, y, lo, &x_lo, l, opts)?;
        work += sol.work;
        x_lo = sol.x;
        res_lo = sol.residual_norm;
        if (res_lo - target_residual).abs() <= tol {
            return Ok(Solution {
                x: x_lo,
                lambda: lo,
                residual_norm: res_lo,
                status: SolveStatus::Converged,
                work,
            });
        }
        if res_lo < target_residual {
            break;
        }
        hi = lo;
        res_hi = res_lo;
        x_hi = x_lo.clone();
        lo /= 2.0;
        if lo < lambda0 * 1e-16 {
            // Even a nearly unpenalized fit cannot reach the target.
            return Ok(Solution {
                x: x_lo,
                lambda: lo,
                residual_norm: res_lo,
                status: SolveStatus::TargetUnreachable,
                work,
            });
        }
    }

    // Safeguarded secant / bisection on the bracket [lo, hi].
    let mut best: Option<(DVector<f64>, f64, f64, f64)> = None;
    for outer in 0..60 {
        let mut mid = if res_hi > res_lo {
            lo + (target_residual - res_lo) / (res_hi - res_lo) * (hi - lo)
        } else {
            0.5 * (lo + hi)
        };
        let (lo_guard, hi_guard) = (lo + 0.02 * (hi - lo), hi - 0.02 * (hi - lo));
        if !(mid.is_finite()) || mid < lo_guard || mid > hi_guard || outer % 3 == 2 {
            mid = 0.5 * (lo + hi);
        }
        let warm = if (mid - lo).abs() < (hi - mid).abs() { &x_lo } else { &x_hi };
        let sol = fista_warm(k, y, mid, warm, l, opts)?;
        work += sol.work;
        let err = (sol.residual_norm - target_residual).abs();
        if best.as_ref().map(|(_, _, _, e)| err < *e).unwrap_or(true) {
            best = Some((sol.x.clone(), mid, sol.residual_norm, err));
        }
        if err <= tol {
            break;
        }
        if sol.residual_norm < target_residual {
            lo = mid;
            res_lo = sol.residual_norm;
            x_lo = sol.x;
        } else {
            hi = mid;
            res_hi = sol.residual_norm;
            x_hi = sol.x;
        }
    }
    let (x, lambda, residual_norm, err) = best.expect("at least one outer iterate");
    let status =
        if err <= tol { SolveStatus::Converged } else { SolveStatus::MaxIterations };
    Ok(Solution { x, lambda, residual_norm, status, work })
}
