//! Magnetic tomography demo: reconstruct a divergence-free surface current
//! on a spherical-shell patch from noisy normal-field measurements.
//!
//! The stream function of the current is sparse in the 2-D biorthogonal 4-2
//! wavelet basis. The forward model composes wavelet synthesis, the surface
//! curl, and Biot-Savart quadrature into one dense sensors-by-coefficients
//! matrix. Reconstructions are run with an l1 penalty (FISTA, penalty weight
//! tuned to the noise level by an outer discrepancy search) and with the
//! quadratic-penalty comparison solver; both report relative errors on the
//! wavelet coefficients.

pub mod biot_savart;
pub mod current;
pub mod design;
pub mod geometry;
pub mod wavelet;

pub use biot_savart::biot_savart_normal;
pub use current::{stream_to_current, surface_divergence, CurrentField, StreamField};
pub use design::{build_design_matrix, TomoDesignMatrix};
pub use geometry::{cubed_sphere_map, PatchGrid, SensorSet};
pub use wavelet::{cdf42_forward_2d, cdf42_inverse_2d};

use nalgebra::DVector;
use rayon::prelude::*;

use crate::problem_gen::{draw_noise, gen_signal, relative_error};
use crate::rng::{derive_seed, tags};
use crate::solvers::{
    fista_discrepancy, ridge_discrepancy, FistaOptions, RidgeOptions, SolveStatus,
};
use crate::{Error, Result};

/// Experiment configuration; the defaults are the full-scale demo.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TomoConfig {
    pub resolution: usize,
    pub sensor_count: usize,
    pub sensor_radius: f64,
    pub epsilon: f64,
    pub nonzeros: usize,
    pub fista_max_iter: usize,
    pub fista_tol: f64,
    pub disc_tol: f64,
}

impl Default for TomoConfig {
    fn default() -> Self {
        Self {
            resolution: 64,
            sensor_count: 1000,
            sensor_radius: 0.1,
            epsilon: 0.1,
            nonzeros: 60,
            fista_max_iter: 30_000,
            fista_tol: 1e-9,
            disc_tol: 1e-6,
        }
    }
}

/// Geometry, sensors, and the assembled design matrix, reusable across
/// signal/noise realizations.
#[derive(Debug, Clone)]
pub struct TomoExperiment {
    pub config: TomoConfig,
    pub grid: PatchGrid,
    pub sensors: SensorSet,
    pub design: TomoDesignMatrix,
}

/// Outcome of one realization.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct TomoRunReport {
    pub seed: u64,
    pub l1_error: f64,
    pub l2_error: f64,
    pub l1_lambda: f64,
    pub l2_lambda2: f64,
    pub l1_residual: f64,
    pub l2_residual: f64,
    pub target_residual: f64,
    pub l1_status: SolveStatus,
    pub l1_iterations: usize,
    pub l2_cg_iterations: usize,
}

/// One realization's vectors, for rendering.
#[derive(Debug, Clone)]
pub struct TomoFields {
    pub input_coeffs: DVector<f64>,
    pub l1_coeffs: DVector<f64>,
    pub l2_coeffs: DVector<f64>,
}

impl TomoExperiment {
    /// Build the geometry and assemble the design matrix. `sensor_seed`
    /// determines the sensor placement.
    pub fn build(config: TomoConfig, sensor_seed: u64) -> Result<Self> {
        if config.nonzeros == 0 || config.nonzeros > config.resolution * config.resolution {
            return Err(Error::InvalidConfig(format!(
                "nonzeros {} out of range for resolution {}",
                config.nonzeros, config.resolution
            )));
        }
        let grid = PatchGrid::new(config.resolution)?;
        let sensors = SensorSet::sample(config.sensor_count, config.sensor_radius, sensor_seed)?;
        let design = build_design_matrix(&grid, &sensors)?;
        Ok(Self { config, grid, sensors, design })
    }

    /// Run one signal/noise realization and both reconstructions.
    pub fn run(&self, seed: u64) -> Result<(TomoRunReport, TomoFields)> {
        let cells = self.config.resolution * self.config.resolution;
        let x0 = gen_signal(cells, self.config.nonzeros, derive_seed(seed, &[tags::SIGNAL]))?;
        let x0_dense = x0.dense();
        let clean = &self.design.matrix * &x0_dense;
        let noise = draw_noise(&clean, self.config.epsilon, derive_seed(seed, &[tags::NOISE]))?;
        let y = &clean + &noise;
        let target = noise.norm().min(y.norm());

        let fista_opts =
            FistaOptions { max_iter: self.config.fista_max_iter, tol: self.config.fista_tol };
        let l1 = fista_discrepancy(&self.design.matrix, &y, target, self.config.disc_tol, &fista_opts)?;
        let l1_error = relative_error(&l1.x, &x0)?;

        let ridge_opts = RidgeOptions { disc_tol: self.config.disc_tol, ..RidgeOptions::default() };
        let l2 = ridge_discrepancy(&self.design.matrix, &y, target, &ridge_opts)?;
        let l2_error = relative_error(&l2.x, &x0)?;

        let report = TomoRunReport {
            seed,
            l1_error,
            l2_error,
            l1_lambda: l1.lambda,
            l2_lambda2: l2.lambda2,
            l1_residual: l1.residual_norm,
            l2_residual: l2.residual_norm,
            target_residual: target,
            l1_status: l1.status,
            l1_iterations: l1.work,
            l2_cg_iterations: l2.cg_iterations,
        };
        let fields = TomoFields { input_coeffs: x0_dense, l1_coeffs: l1.x, l2_coeffs: l2.x };
        Ok((report, fields))
    }

    /// Run several realizations (in parallel; results are seed-deterministic)
    /// and collect the reports.
    pub fn run_many(&self, master_seed: u64, runs: usize) -> Result<Vec<TomoRunReport>> {
        let reports: Vec<Result<TomoRunReport>> = (0..runs)
            .into_par_iter()
            .map(|i| {
                self.run(derive_seed(master_seed, &[tags::RUN, i as u64]))
                    .map(|(report, _)| report)
            })
            .collect();
        reports.into_iter().collect()
    }
}

/// Convenience entry point: build the default experiment (sensors seeded
/// from `seed`) and run one realization.
pub fn run_tomo_experiment(seed: u64) -> Result<(TomoRunReport, TomoFields)> {
    let experiment = TomoExperiment::build(TomoConfig::default(), derive_seed(seed, &[tags::SENSORS]))?;
    experiment.run(seed)
}

/// Median of a nonempty slice.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Small-scale end-to-end smoke test; the full-scale statistics live in
    /// the acceptance suite.
    #[test]
    fn small_experiment_runs_and_l1_beats_l2() {
        let config = TomoConfig {
            resolution: 16,
            sensor_count: 120,
            nonzeros: 8,
            fista_max_iter: 20_000,
            fista_tol: 1e-9,
            ..TomoConfig::default()
        };
        let experiment = TomoExperiment::build(config, 5).unwrap();
        let (report, fields) = experiment.run(11).unwrap();
        assert_eq!(report.l1_status, SolveStatus::Converged);
        assert!(report.l1_error < 1.0, "l1 error {}", report.l1_error);
        assert!(report.l1_error < report.l2_error, "{} vs {}", report.l1_error, report.l2_error);
        assert!(
            (report.l1_residual - report.target_residual).abs() <= 1e-6 * report.target_residual * 20.0
        );
        assert_eq!(fields.input_coeffs.len(), 256);
    }

    #[test]
    fn median_of_samples() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
