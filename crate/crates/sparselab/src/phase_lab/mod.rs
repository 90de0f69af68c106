//! Monte Carlo sweeps over the indeterminacy/sparsity plane.
//!
//! A sweep fixes a matrix ensemble, a noise level and a grid of
//! `(delta, rho)` points with `delta = m/n` and `rho = k/m`. Every grid cell
//! runs `trials` independent recoveries: fresh parent matrix, row subsample,
//! sparse signal and noise, then the homotopy path solved to the discrepancy
//! target `||eta||`. Cell statistics are means of the relative
//! reconstruction error.
//!
//! Per-trial seeds are derived from `(base_seed, delta index, rho index,
//! trial index)`, so results are identical for any scheduling of the work,
//! and matched across noise levels and ensembles sharing a `base_seed`.

pub mod contour;

pub use contour::{extract_level_curves, rho_crossings_at_delta, LevelCurve};

use rayon::prelude::*;
use std::io::Write;

use crate::ensembles::{gen_parent, subsample_rows, SpectrumSpec};
use crate::problem_gen::{gen_signal, relative_error, synthesize};
use crate::rng::{derive_seed, tags};
use crate::solvers::{lasso_path, SolveStatus, StopRule};
use crate::{Error, Result};

/// Grid and trial configuration for one sweep.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PhaseGridSpec {
    pub delta_values: Vec<f64>,
    pub rho_values: Vec<f64>,
    pub n: usize,
    pub trials: usize,
    pub epsilon: f64,
    pub ensemble: SpectrumSpec,
    pub base_seed: u64,
}

/// `count` equidistant values from `lo` to `hi` inclusive.
pub fn equidistant(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    (0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect()
}

impl PhaseGridSpec {
    /// CI-scale preset: 10x10 grid over [0.025, 1], n = 200, 20 trials.
    pub fn mini(epsilon: f64, ensemble: SpectrumSpec, base_seed: u64) -> Self {
        Self {
            delta_values: equidistant(0.025, 1.0, 10),
            rho_values: equidistant(0.025, 1.0, 10),
            n: 200,
            trials: 20,
            epsilon,
            ensemble,
            base_seed,
        }
    }

    /// Full-scale preset: 40x40 grid over [0.025, 1], n = 800, 100 trials.
    /// Hours of compute; not exercised by the test suite.
    pub fn paper(epsilon: f64, ensemble: SpectrumSpec, base_seed: u64) -> Self {
        Self {
            delta_values: equidistant(0.025, 1.0, 40),
            rho_values: equidistant(0.025, 1.0, 40),
            n: 800,
            trials: 100,
            epsilon,
            ensemble,
            base_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.delta_values.is_empty() || self.rho_values.is_empty() {
            return Err(Error::InvalidConfig("grid axes must be nonempty".into()));
        }
        for v in self.delta_values.iter().chain(&self.rho_values) {
            if !(*v > 0.0 && *v <= 1.0) {
                return Err(Error::InvalidConfig(format!(
                    "grid values must lie in (0, 1], got {v}"
                )));
            }
        }
        if self.n < 2 {
            return Err(Error::InvalidConfig("n must be at least 2".into()));
        }
        if self.trials < 1 {
            return Err(Error::InvalidConfig("need at least one trial".into()));
        }
        if !(self.epsilon >= 0.0) {
            return Err(Error::InvalidConfig("epsilon must be >= 0".into()));
        }
        self.ensemble.validate()
    }

    /// Row count for a given indeterminacy: `m = max(1, round(delta * n))`.
    pub fn rows_for(&self, delta: f64) -> usize {
        ((delta * self.n as f64).round() as usize).max(1)
    }

    /// Sparsity for a given `m`: `k = max(1, round(rho * m))`.
    pub fn sparsity_for(&self, rho: f64, m: usize) -> usize {
        ((rho * m as f64).round() as usize).max(1).min(self.n)
    }
}

/// Aggregated statistics for one grid cell.
#[derive(Debug, Clone)]
pub struct CellStat {
    pub delta: f64,
    pub rho: f64,
    pub m: usize,
    pub k: usize,
    pub mean_error: f64,
    pub std_error: f64,
    pub trial_count: usize,
    /// Trials whose solver status was anything but `Converged`. Their
    /// returned vectors still enter the mean.
    pub failure_count: usize,
}

/// Results of a sweep, cells stored delta-major (`di * n_rho + ri`).
#[derive(Debug, Clone)]
pub struct SweepResult {
    pub spec: PhaseGridSpec,
    pub cells: Vec<CellStat>,
}

impl SweepResult {
    pub fn cell(&self, di: usize, ri: usize) -> &CellStat {
        &self.cells[di * self.spec.rho_values.len() + ri]
    }

    /// Mean-error value grid indexed `[di][ri]`.
    pub fn value_grid(&self) -> Vec<Vec<f64>> {
        let nr = self.spec.rho_values.len();
        self.cells
            .chunks(nr)
            .map(|row| row.iter().map(|c| c.mean_error).collect())
            .collect()
    }

    /// CSV rows `delta,rho,m,k,trials,failures,mean_error,std_error`.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "delta,rho,m,k,trials,failures,mean_error,std_error")?;
        for c in &self.cells {
            writeln!(
                w,
                "{},{},{},{},{},{},{},{}",
                c.delta, c.rho, c.m, c.k, c.trial_count, c.failure_count, c.mean_error, c.std_error
            )?;
        }
        Ok(())
    }
}

/// One recovery trial; never panics on solver trouble, reporting a failed
/// trial instead.
fn run_trial(spec: &PhaseGridSpec, di: usize, ri: usize, t: usize, m: usize, k: usize) -> (f64, bool) {
    let trial_seed = derive_seed(
        spec.base_seed,
        &[tags::TRIAL, di as u64, ri as u64, t as u64],
    );
    let attempt = || -> Result<(f64, bool)> {
        let parent = gen_parent(spec.n, &spec.ensemble, derive_seed(trial_seed, &[tags::PARENT]))?;
        let matrix = subsample_rows(&parent, m, derive_seed(trial_seed, &[tags::ROWS]))?;
        let signal = gen_signal(spec.n, k, derive_seed(trial_seed, &[tags::SIGNAL]))?;
        let inst = synthesize(matrix, &signal, spec.epsilon, derive_seed(trial_seed, &[tags::NOISE]))?;
        // Morozov target; clamped to ||y|| for the rare draw where the noise
        // norm exceeds the data norm (then x = 0 already fits to noise level).
        let target = inst.noise_norm().min(inst.data.norm());
        let (_, sol) = lasso_path(inst.matrix.entries(), &inst.data, StopRule::TargetResidual(target))?;
        let err = relative_error(&sol.x, &signal)?;
        Ok((err, sol.status != SolveStatus::Converged))
    };
    // A hard error counts as a failed trial with the zero estimate.
    attempt().unwrap_or((1.0, true))
}

fn aggregate(spec: &PhaseGridSpec, di: usize, ri: usize, outcomes: &[(f64, bool)]) -> CellStat {
    let delta = spec.delta_values[di];
    let rho = spec.rho_values[ri];
    let m = spec.rows_for(delta);
    let k = spec.sparsity_for(rho, m);
    let count = outcomes.len();
    let mean = outcomes.iter().map(|(e, _)| e).sum::<f64>() / count as f64;
    let std = if count > 1 {
        (outcomes.iter().map(|(e, _)| (e - mean) * (e - mean)).sum::<f64>() / (count - 1) as f64)
            .sqrt()
    } else {
        0.0
    };
    CellStat {
        delta,
        rho,
        m,
        k,
        mean_error: mean,
        std_error: std,
        trial_count: count,
        failure_count: outcomes.iter().filter(|(_, f)| *f).count(),
    }
}

/// Run a single grid cell identified by its `(delta, rho)` values, which must
/// be members of the grid.
pub fn run_cell(spec: &PhaseGridSpec, delta: f64, rho: f64) -> Result<CellStat> {
    spec.validate()?;
    let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * b.abs().max(1.0);
    let di = spec
        .delta_values
        .iter()
        .position(|v| close(*v, delta))
        .ok_or_else(|| Error::InvalidConfig(format!("delta {delta} is not a grid value")))?;
    let ri = spec
        .rho_values
        .iter()
        .position(|v| close(*v, rho))
        .ok_or_else(|| Error::InvalidConfig(format!("rho {rho} is not a grid value")))?;
    Ok(run_cell_by_index(spec, di, ri))
}

fn run_cell_by_index(spec: &PhaseGridSpec, di: usize, ri: usize) -> CellStat {
    let m = spec.rows_for(spec.delta_values[di]);
    let k = spec.sparsity_for(spec.rho_values[ri], m);
    let outcomes: Vec<(f64, bool)> =
        (0..spec.trials).map(|t| run_trial(spec, di, ri, t, m, k)).collect();
    aggregate(spec, di, ri, &outcomes)
}

/// Run the whole grid. Work is distributed over `(cell, trial)` tasks; the
/// per-task seed derivation makes the outcome identical for any thread count.
pub fn run_sweep(spec: &PhaseGridSpec) -> Result<SweepResult> {
    spec.validate()?;
    let nd = spec.delta_values.len();
    let nr = spec.rho_values.len();
    let trials = spec.trials;

    let tasks: Vec<(usize, usize, usize)> = (0..nd)
        .flat_map(|di| (0..nr).flat_map(move |ri| (0..trials).map(move |t| (di, ri, t))))
        .collect();

    let outcomes: Vec<(f64, bool)> = tasks
        .par_iter()
        .map(|&(di, ri, t)| {
            let m = spec.rows_for(spec.delta_values[di]);
            let k = spec.sparsity_for(spec.rho_values[ri], m);
            run_trial(spec, di, ri, t, m, k)
        })
        .collect();

    let mut cells = Vec::with_capacity(nd * nr);
    for di in 0..nd {
        for ri in 0..nr {
            let base = (di * nr + ri) * trials;
            cells.push(aggregate(spec, di, ri, &outcomes[base..base + trials]));
        }
    }
    Ok(SweepResult { spec: spec.clone(), cells })
}
