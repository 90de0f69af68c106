//! Shared oracles for integration tests. These are deliberately independent
//! implementations: they share no code with the solver paths they check.

use nalgebra::{DMatrix, DVector};

/// Coordinate descent for `||Kx - y||^2 + 2*lambda*||x||_1`, iterated until
/// the duality gap and the per-sweep coefficient change are both tiny.
///
/// The dual of `g(x) = 0.5*||Kx - y||^2 + lambda*||x||_1` is
/// `D(theta) = 0.5*||y||^2 - 0.5*||y - theta||^2` over `||K^T theta||_inf <=
/// lambda`; scaling the residual into the feasible set gives a certified gap.
/// The objective here is `2*g`, so the reported gap is doubled.
pub fn coordinate_descent_lasso(
    k: &DMatrix<f64>,
    y: &DVector<f64>,
    lambda: f64,
    max_sweeps: usize,
) -> DVector<f64> {
    let n = k.ncols();
    let col_sq: Vec<f64> = (0..n).map(|j| k.column(j).norm_squared()).collect();
    let mut x = DVector::<f64>::zeros(n);
    let mut r = y.clone();
    let gap_tol = 1e-13 * y.norm_squared().max(1.0);

    for _ in 0..max_sweeps {
        let mut max_change = 0.0f64;
        for j in 0..n {
            if col_sq[j] == 0.0 {
                continue;
            }
            let xj = x[j];
            let rho = k.column(j).dot(&r) + col_sq[j] * xj;
            let new = soft(rho, lambda) / col_sq[j];
            if new != xj {
                let d = new - xj;
                r.axpy(-d, &k.column(j), 1.0);
                x[j] = new;
                max_change = max_change.max(d.abs());
            }
        }

        let ktr = k.transpose() * &r;
        let ktr_inf = ktr.amax();
        let scale = if ktr_inf > lambda && ktr_inf > 0.0 { lambda / ktr_inf } else { 1.0 };
        let theta = &r * scale;
        let primal = 0.5 * r.norm_squared() + lambda * x.iter().map(|v| v.abs()).sum::<f64>();
        let dual = 0.5 * y.norm_squared() - 0.5 * (y - &theta).norm_squared();
        let gap = 2.0 * (primal - dual);
        if gap <= gap_tol && max_change <= 1e-13 {
            break;
        }
    }
    x
}

fn soft(v: f64, tau: f64) -> f64 {
    if v > tau {
        v - tau
    } else if v < -tau {
        v + tau
    } else {
        0.0
    }
}

/// Magnetic dipole field `B(r) = mu0/4pi * (3 (m.rhat) rhat - m) / |r|^3`
/// at `pos` relative to the dipole position.
pub fn dipole_field(moment: &[f64; 3], rel: &[f64; 3]) -> [f64; 3] {
    let r2 = rel[0] * rel[0] + rel[1] * rel[1] + rel[2] * rel[2];
    let r = r2.sqrt();
    let rhat = [rel[0] / r, rel[1] / r, rel[2] / r];
    let mdot = moment[0] * rhat[0] + moment[1] * rhat[1] + moment[2] * rhat[2];
    let c = 1e-7 / (r * r2);
    [
        c * (3.0 * mdot * rhat[0] - moment[0]),
        c * (3.0 * mdot * rhat[1] - moment[1]),
        c * (3.0 * mdot * rhat[2] - moment[2]),
    ]
}
