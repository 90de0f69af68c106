use std::time::Instant;
use sparselab::magtomo::{TomoConfig, TomoExperiment};
use sparselab::problem_gen::{draw_noise, gen_signal};
use sparselab::rng::{derive_seed, tags};
use sparselab::solvers::{fista_warm, spectral_norm_sq, FistaOptions};

fn main() {
    let experiment = TomoExperiment::build(TomoConfig::default(), derive_seed(424242, &[tags::SENSORS])).unwrap();
    let k = &experiment.design.matrix;
    let seed = derive_seed(424242, &[tags::RUN, 0]);
    let x0 = gen_signal(4096, 60, derive_seed(seed, &[tags::SIGNAL])).unwrap();
    let clean = k * x0.dense();
    let noise = draw_noise(&clean, 0.1, derive_seed(seed, &[tags::NOISE])).unwrap();
    let y = &clean + &noise;
    let target = noise.norm();
    let ynorm = y.norm();
    println!("target/||y|| = {:.4}", target / ynorm);

    let l = spectral_norm_sq(k);
    let lambda0 = (k.transpose() * &y).amax();
    let opts = FistaOptions { max_iter: 30_000, tol: 1e-9 };
    let mut x = nalgebra::DVector::zeros(4096);
    let mut lam = lambda0 / 2.0;
    let total_t = Instant::now();
    let mut total_iters = 0usize;
    for step in 0..40 {
        let t = Instant::now();
        let sol = fista_warm(k, &y, lam, &x, l, &opts).unwrap();
        total_iters += sol.work;
        x = sol.x.clone();
        let nnz = x.iter().filter(|v| **v != 0.0).count();
        println!("step {step}: lam=lambda0/{:.0} {:?} iters {} res/||y|| {:.4} nnz {}",
            lambda0 / lam, t.elapsed(), sol.work, sol.residual_norm / ynorm, nnz);
        if sol.residual_norm <= target { break; }
        lam /= 2.0;
    }
    println!("bracketing total: {:?}, iters {}", total_t.elapsed(), total_iters);
}
