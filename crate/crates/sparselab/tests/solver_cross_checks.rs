//! Cross-solver agreement on small instances: the homotopy path against an
//! independent coordinate-descent oracle, and FISTA against the path.

mod common;

use nalgebra::DVector;
use sparselab::ensembles::{gen_parent, subsample_rows, SpectrumSpec};
use sparselab::problem_gen::{gen_signal, synthesize};
use sparselab::rng::{derive_seed, tags};
use sparselab::solvers::{
    fista, kkt_certificate, lasso_objective, lasso_path, FistaOptions, SolveStatus, StopRule,
};

fn instance(
    m: usize,
    n: usize,
    k_sparse: usize,
    epsilon: f64,
    seed: u64,
) -> (nalgebra::DMatrix<f64>, DVector<f64>, f64) {
    let parent = gen_parent(n, &SpectrumSpec::type1(), derive_seed(seed, &[tags::PARENT])).unwrap();
    let mat = subsample_rows(&parent, m, derive_seed(seed, &[tags::ROWS])).unwrap();
    let x0 = gen_signal(n, k_sparse, derive_seed(seed, &[tags::SIGNAL])).unwrap();
    let inst = synthesize(mat, &x0, epsilon, derive_seed(seed, &[tags::NOISE])).unwrap();
    let noise_norm = inst.noise_norm();
    (inst.matrix.entries().clone(), inst.data, noise_norm)
}

#[test]
fn path_matches_coordinate_descent_at_noise_target() {
    // The 20x50 case: solve to the discrepancy target, then re-solve the
    // functional at the returned lambda with coordinate descent.
    let (k, y, eta) = instance(20, 50, 4, 0.05, 42);
    let (_, sol) = lasso_path(&k, &y, StopRule::TargetResidual(eta)).unwrap();
    assert_eq!(sol.status, SolveStatus::Converged);
    let oracle = common::coordinate_descent_lasso(&k, &y, sol.lambda, 200_000);
    let dev = (&sol.x - &oracle).amax();
    assert!(dev <= 1e-8, "max coefficient deviation {dev:.3e}");
}

#[test]
fn path_matches_oracle_across_instances_and_targets() {
    for trial in 0..20u64 {
        let m = 12 + (trial as usize * 7) % 29; // 12..=40
        let n = (2 * m + 5).min(80);
        let k_sparse = (m / 5).max(1);
        let (k, y, _) = instance(m, n, k_sparse, 0.05, 1000 + trial);
        let ynorm = y.norm();
        for frac in [0.6, 0.3, 0.1] {
            let rt = frac * ynorm;
            let (_, sol) = lasso_path(&k, &y, StopRule::TargetResidual(rt)).unwrap();
            assert_eq!(sol.status, SolveStatus::Converged, "trial {trial} frac {frac}");
            assert!(
                (sol.residual_norm - rt).abs() <= 1e-6 * ynorm,
                "discrepancy violated: trial {trial} frac {frac}"
            );
            let (ratio, active_dev) = kkt_certificate(&k, &y, &sol.x, sol.lambda);
            assert!(ratio <= 1.0 + 1e-8, "trial {trial}: KKT ratio {ratio}");
            assert!(active_dev <= 1e-8, "trial {trial}: KKT active dev {active_dev}");

            let oracle = common::coordinate_descent_lasso(&k, &y, sol.lambda, 200_000);
            let dev = (&sol.x - &oracle).amax();
            assert!(dev <= 1e-8, "trial {trial} frac {frac}: deviation {dev:.3e}");
        }
    }
}

#[test]
fn fista_agrees_with_path_objective() {
    let (k, y, eta) = instance(20, 50, 4, 0.05, 7);
    let (_, path_sol) = lasso_path(&k, &y, StopRule::TargetResidual(eta)).unwrap();
    let lambda = path_sol.lambda;
    let sol = fista(&k, &y, lambda, &FistaOptions { max_iter: 300_000, tol: 1e-12 }).unwrap();
    let f_path = lasso_objective(&k, &y, &path_sol.x, lambda);
    let f_fista = lasso_objective(&k, &y, &sol.x, lambda);
    assert!(
        (f_fista - f_path).abs() <= 1e-8 * f_path.max(1.0),
        "objectives: fista {f_fista} vs path {f_path}"
    );
}
