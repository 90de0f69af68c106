//! Exact lasso homotopy (LARS with the lasso modification).
//!
//! The minimizer of `||Kx - y||^2 + 2*lambda*||x||_1` is piecewise linear in
//! lambda. Starting at `lambda0 = ||K^T y||_inf` with `x = 0`, the path is
//! followed segment by segment: on each segment the active set and signs are
//! fixed and
//!
//! ```text
//! x_A(lambda) = u - lambda * w,    G u = K_A^T y,    G w = s,
//! ```
//!
//! with `G = K_A^T K_A` and `s` the sign vector. Variables enter at
//! equicorrelation events and leave when a coefficient crosses zero. Because
//! the least-squares residual `r_ls = y - K_A u` is orthogonal to
//! `q = K_A w`, the residual norm obeys `res^2(lambda) = ||r_ls||^2 +
//! lambda^2 ||q||^2` on the segment, so a residual target is met exactly by
//! solving that scalar quadratic for lambda inside the segment.

use nalgebra::{DMatrix, DVector};

use super::{SolveStatus, Solution};
use crate::{Error, Result};

/// Relative tie tolerance for simultaneous events.
const TIE_TOL: f64 = 1e-10;
/// Events must strictly decrease lambda by this relative margin.
const DESCENT_GUARD: f64 = 1e-12;
/// Candidates below this fraction of lambda0 are floating-point noise from a
/// (near-)exactly fitted residual; the path is treated as exhausted instead.
const LAMBDA_FLOOR_REL: f64 = 1e-12;
/// Gram condition estimate beyond which the path is flagged degenerate.
const DEGENERATE_COND: f64 = 1e12;
/// Relative truncation level for singular values in the degenerate solve.
const SVD_TRUNC: f64 = 1e-12;

/// Where to stop the homotopy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule {
    /// Stop where `||Kx - y||` crosses this value (discrepancy principle).
    TargetResidual(f64),
    /// Follow the path down to this lambda and return the minimizer there.
    MinLambda(f64),
}

/// One vertex of the piecewise-linear path.
#[derive(Debug, Clone)]
pub struct PathBreakpoint {
    pub lambda: f64,
    pub x: DVector<f64>,
    pub residual_norm: f64,
    /// Active indices, in the order they entered.
    pub active_set: Vec<usize>,
    /// Sign of each active coefficient on the segment above this breakpoint.
    pub signs: Vec<i8>,
}

/// The full regularization path.
#[derive(Debug, Clone)]
pub struct LassoPath {
    pub breakpoints: Vec<PathBreakpoint>,
}

struct Directions {
    u: DVector<f64>,
    w: DVector<f64>,
    degenerate: bool,
}

/// Rough condition estimate for a factorized SPD matrix: a few power
/// iterations for the top eigenvalue, a few inverse-power iterations (via
/// the Cholesky factor) for the bottom one. Order-of-magnitude accuracy is
/// plenty for a 1e12 threshold test.
fn gram_condition_estimate(gram: &DMatrix<f64>, ch: &nalgebra::Cholesky<f64, nalgebra::Dyn>) -> f64 {
    let a = gram.nrows();
    let mut p = DVector::<f64>::from_fn(a, |i, _| {
        // Deterministic, sign-varying start vector.
        let h = crate::rng::splitmix64(i as u64 + 1);
        (h as f64 / u64::MAX as f64) - 0.5
    });
    let nrm = p.norm();
    if nrm == 0.0 {
        return f64::INFINITY;
    }
    p /= nrm;
    let mut q = p.clone();
    let mut top = 0.0f64;
    let mut bottom_inv = 0.0f64;
    for _ in 0..4 {
        p = gram * &p;
        top = p.norm();
        if !top.is_finite() || top == 0.0 {
            return f64::INFINITY;
        }
        p /= top;

        q = ch.solve(&q);
        bottom_inv = q.norm();
        if !bottom_inv.is_finite() || bottom_inv == 0.0 {
            return f64::INFINITY;
        }
        q /= bottom_inv;
    }
    top * bottom_inv
}

/// Solve `G u = rhs_y`, `G w = s` for the current active Gram matrix,
/// falling back to a truncated-SVD least-squares solve when the Cholesky
/// factorization fails, loses accuracy, or the condition estimate exceeds
/// the degeneracy threshold.
fn solve_directions(gram: &DMatrix<f64>, rhs_y: &DVector<f64>, s: &DVector<f64>) -> Directions {
    let a = gram.nrows();
    if a == 0 {
        return Directions { u: DVector::zeros(0), w: DVector::zeros(0), degenerate: false };
    }
    if let Some(ch) = nalgebra::Cholesky::new(gram.clone()) {
        if gram_condition_estimate(gram, &ch) <= DEGENERATE_COND {
            let u = ch.solve(rhs_y);
            let w = ch.solve(s);
            let ok = |sol: &DVector<f64>, rhs: &DVector<f64>| {
                let resid = (gram * sol - rhs).norm();
                resid.is_finite() && resid <= 1e-8 * rhs.norm().max(f64::MIN_POSITIVE)
            };
            if ok(&u, rhs_y) && ok(&w, s) {
                return Directions { u, w, degenerate: false };
            }
        }
    }
    // Truncated-SVD route for a numerically singular Gram matrix.
    let svd = gram.clone().svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.iter().cloned().fold(0.0f64, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    let degenerate = smax == 0.0 || smin <= smax / DEGENERATE_COND;
    let cutoff = SVD_TRUNC * smax;
    let pinv_solve = |rhs: &DVector<f64>| -> DVector<f64> {
        let ut_rhs = svd.u.as_ref().unwrap().transpose() * rhs;
        let mut scaled = DVector::zeros(a);
        for i in 0..a {
            if sv[i] > cutoff {
                scaled[i] = ut_rhs[i] / sv[i];
            }
        }
        svd.v_t.as_ref().unwrap().transpose() * scaled
    };
    Directions { u: pinv_solve(rhs_y), w: pinv_solve(s), degenerate }
}

/// Run the homotopy path until the stop rule triggers.
///
/// Returns the recorded path and the solution interpolated inside the segment
/// where the stop rule is met. `TargetUnreachable` is reported when the
/// requested residual lies below the attainable floor, `DegeneratePath` when
/// a numerically singular active Gram matrix was encountered along the way,
/// and `MaxIterations` when the event budget runs out.
pub fn lasso_path(
    k: &DMatrix<f64>,
    y: &DVector<f64>,
    stop: StopRule,
) -> Result<(LassoPath, Solution)> {
    let m = k.nrows();
    let n = k.ncols();
    if y.len() != m {
        return Err(Error::InvalidDimension(format!(
            "y has length {}, expected {m}",
            y.len()
        )));
    }
    let ynorm = y.norm();
    match stop {
        StopRule::TargetResidual(rt) => {
            if !(0.0..=ynorm * (1.0 + 1e-12)).contains(&rt) {
                return Err(Error::InvalidTarget(format!(
                    "residual target {rt} outside [0, ||y||] = [0, {ynorm}]"
                )));
            }
        }
        StopRule::MinLambda(l) => {
            if !(l >= 0.0) {
                return Err(Error::InvalidTarget(format!("min lambda {l} must be >= 0")));
            }
        }
    }

    let kt = k.transpose();
    let c0 = &kt * y;
    let lambda0 = c0.iter().map(|v| v.abs()).fold(0.0f64, f64::max);

    let mut breakpoints = vec![PathBreakpoint {
        lambda: lambda0,
        x: DVector::zeros(n),
        residual_norm: ynorm,
        active_set: Vec::new(),
        signs: Vec::new(),
    }];

    // Zero is optimal at and above lambda0; handle stops that never leave it.
    let zero_solution = |lambda: f64, status: SolveStatus, work: usize| Solution {
        x: DVector::zeros(n),
        lambda,
        residual_norm: ynorm,
        status,
        work,
    };
    match stop {
        StopRule::TargetResidual(rt) => {
            if rt >= ynorm * (1.0 - 1e-6) || lambda0 == 0.0 {
                let status = if (ynorm - rt).abs() <= 1e-6 * ynorm.max(f64::MIN_POSITIVE) {
                    SolveStatus::Converged
                } else if rt >= ynorm {
                    SolveStatus::Converged
                } else {
                    // lambda0 == 0: y is orthogonal to the range of K.
                    SolveStatus::TargetUnreachable
                };
                if status != SolveStatus::TargetUnreachable || lambda0 == 0.0 {
                    return Ok((LassoPath { breakpoints }, zero_solution(lambda0, status, 0)));
                }
            }
        }
        StopRule::MinLambda(l) => {
            if l >= lambda0 {
                return Ok((
                    LassoPath { breakpoints },
                    zero_solution(l, SolveStatus::Converged, 0),
                ));
            }
        }
    }

    // Initial active set: all indices tied at the maximum correlation.
    let mut active: Vec<usize> = Vec::new();
    let mut signs: Vec<f64> = Vec::new();
    let mut is_active = vec![false; n];
    for j in 0..n {
        if c0[j].abs() >= lambda0 * (1.0 - TIE_TOL) {
            active.push(j);
            signs.push(c0[j].signum());
            is_active[j] = true;
        }
    }

    let mut gram = DMatrix::<f64>::zeros(active.len(), active.len());
    for (p, &i) in active.iter().enumerate() {
        for (qq, &j) in active.iter().enumerate() {
            gram[(p, qq)] = k.column(i).dot(&k.column(j));
        }
    }
    let mut rhs_y: Vec<f64> = active.iter().map(|&j| k.column(j).dot(y)).collect();

    let mut degenerate = false;
    let mut lambda_cur = lambda0;
    let max_events = 50 * m.min(n) + 200;

    let assemble = |active: &[usize], coef: &DVector<f64>| -> DVector<f64> {
        let mut x = DVector::zeros(n);
        for (p, &j) in active.iter().enumerate() {
            x[j] = coef[p];
        }
        x
    };
    let residual_of = |x: &DVector<f64>| -> f64 { (y - k * x).norm() };

    for event in 1..=max_events {
        let a_len = active.len();
        let s_vec = DVector::from_vec(signs.clone());
        let rhs_vec = DVector::from_vec(rhs_y.clone());
        let dirs = solve_directions(&gram, &rhs_vec, &s_vec);
        degenerate |= dirs.degenerate;
        let (u, w) = (dirs.u, dirs.w);

        // r_ls = y - K_A u and q = K_A w.
        let mut r_ls = y.clone();
        let mut q = DVector::<f64>::zeros(m);
        for (p, &j) in active.iter().enumerate() {
            r_ls.axpy(-u[p], &k.column(j), 1.0);
            q.axpy(w[p], &k.column(j), 1.0);
        }
        let rls2 = r_ls.norm_squared();
        let q2 = q.norm_squared();

        let corr_ls = &kt * &r_ls;
        let corr_q = &kt * &q;

        // Candidate events below lambda_cur.
        let upper = lambda_cur * (1.0 - DESCENT_GUARD);
        let floor = lambda0 * LAMBDA_FLOOR_REL;
        let mut enter_max = 0.0f64;
        for j in 0..n {
            if is_active[j] {
                continue;
            }
            for s in [1.0f64, -1.0] {
                let den = s - corr_q[j];
                if den.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let lam = corr_ls[j] / den;
                if lam > floor && lam < upper && lam > enter_max {
                    enter_max = lam;
                }
            }
        }
        let mut leave_max = 0.0f64;
        for p in 0..a_len {
            if w[p] != 0.0 {
                let lam = u[p] / w[p];
                if lam > floor && lam < upper && lam > leave_max {
                    leave_max = lam;
                }
            }
        }
        let lambda_next = enter_max.max(leave_max);

        // Stop inside the current segment?
        match stop {
            StopRule::TargetResidual(rt) => {
                let res_next_sq = rls2 + lambda_next * lambda_next * q2;
                if rt * rt >= res_next_sq || rt >= res_next_sq.sqrt() {
                    let lambda_star = if q2 > 0.0 {
                        ((rt * rt - rls2).max(0.0) / q2).sqrt().clamp(lambda_next, lambda_cur)
                    } else {
                        lambda_next
                    };
                    let x = assemble(&active, &(&u - &w * lambda_star));
                    let status =
                        if degenerate { SolveStatus::DegeneratePath } else { SolveStatus::Converged };
                    let sol = Solution {
                        residual_norm: residual_of(&x),
                        x,
                        lambda: lambda_star,
                        status,
                        work: event,
                    };
                    return Ok((LassoPath { breakpoints }, sol));
                }
            }
            StopRule::MinLambda(l) => {
                if l >= lambda_next {
                    let x = assemble(&active, &(&u - &w * l));
                    let status =
                        if degenerate { SolveStatus::DegeneratePath } else { SolveStatus::Converged };
                    let sol = Solution {
                        residual_norm: residual_of(&x),
                        x,
                        lambda: l,
                        status,
                        work: event,
                    };
                    return Ok((LassoPath { breakpoints }, sol));
                }
            }
        }

        if lambda_next <= 0.0 {
            // Path exhausted: the least-squares point on the final active set.
            let x = assemble(&active, &u);
            let res = residual_of(&x);
            breakpoints.push(PathBreakpoint {
                lambda: 0.0,
                x: x.clone(),
                residual_norm: res,
                active_set: active.clone(),
                signs: signs.iter().map(|s| *s as i8).collect(),
            });
            let status = match stop {
                StopRule::TargetResidual(rt) => {
                    if (res - rt).abs() <= 1e-6 * ynorm.max(f64::MIN_POSITIVE) {
                        if degenerate {
                            SolveStatus::DegeneratePath
                        } else {
                            SolveStatus::Converged
                        }
                    } else {
                        SolveStatus::TargetUnreachable
                    }
                }
                // MinLambda(l) with l >= 0 is always caught inside a segment.
                StopRule::MinLambda(_) => SolveStatus::Converged,
            };
            let sol = Solution { x, lambda: 0.0, residual_norm: res, status, work: event };
            return Ok((LassoPath { breakpoints }, sol));
        }

        // Record the breakpoint at lambda_next.
        let x_next = assemble(&active, &(&u - &w * lambda_next));
        breakpoints.push(PathBreakpoint {
            lambda: lambda_next,
            x: x_next,
            residual_norm: (rls2 + lambda_next * lambda_next * q2).sqrt(),
            active_set: active.clone(),
            signs: signs.iter().map(|s| *s as i8).collect(),
        });

        // Apply the event; on a tie between entering and leaving, prefer the
        // leave so the Gram matrix cannot pick up a dependent column.
        if leave_max > 0.0 && leave_max >= enter_max * (1.0 - TIE_TOL) {
            let mut drop: Vec<usize> = (0..a_len)
                .filter(|&p| {
                    w[p] != 0.0 && {
                        let lam = u[p] / w[p];
                        lam > floor && lam < upper && lam >= lambda_next * (1.0 - TIE_TOL)
                    }
                })
                .collect();
            drop.sort_unstable_by(|x, b| b.cmp(x));
            for p in drop {
                is_active[active[p]] = false;
                active.remove(p);
                signs.remove(p);
                rhs_y.remove(p);
                gram = gram.clone().remove_row(p).remove_column(p);
            }
        } else {
            for j in 0..n {
                if is_active[j] {
                    continue;
                }
                let mut hit = false;
                let mut sgn = 1.0f64;
                for s in [1.0f64, -1.0] {
                    let den = s - corr_q[j];
                    if den.abs() <= f64::MIN_POSITIVE {
                        continue;
                    }
                    let lam = corr_ls[j] / den;
                    if lam > floor && lam < upper && lam >= lambda_next * (1.0 - TIE_TOL) {
                        hit = true;
                        sgn = s;
                    }
                }
                if hit {
                    // Grow the Gram matrix by one row/column.
                    let a_old = active.len();
                    let mut grown = DMatrix::<f64>::zeros(a_old + 1, a_old + 1);
                    grown.view_mut((0, 0), (a_old, a_old)).copy_from(&gram);
                    for (p, &i) in active.iter().enumerate() {
                        let dot = k.column(i).dot(&k.column(j));
                        grown[(p, a_old)] = dot;
                        grown[(a_old, p)] = dot;
                    }
                    grown[(a_old, a_old)] = k.column(j).norm_squared();
                    gram = grown;
                    rhs_y.push(k.column(j).dot(y));
                    active.push(j);
                    signs.push(sgn);
                    is_active[j] = true;
                }
            }
        }
        lambda_cur = lambda_next;
    }

    // Event budget exhausted; return the last breakpoint.
    let last = breakpoints.last().expect("at least the initial breakpoint");
    let sol = Solution {
        x: last.x.clone(),
        lambda: last.lambda,
        residual_norm: last.residual_norm,
        status: SolveStatus::MaxIterations,
        work: max_events,
    };
    Ok((LassoPath { breakpoints }, sol))
}
