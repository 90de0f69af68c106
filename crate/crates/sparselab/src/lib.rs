//! A numerical laboratory for sparse recovery from noisy, ill-conditioned
//! linear measurements.
//!
//! The crate generates measurement matrices with prescribed singular-value
//! spectra, synthesizes sparse noisy inverse problems, solves them with an
//! exact lasso homotopy path (with discrepancy stopping), FISTA, or a ridge
//! comparison solver, and aggregates the results into phase diagrams over the
//! indeterminacy/sparsity plane. A magnetic tomography demo exercises the
//! whole pipeline on a cubed-sphere surface-current model with a CDF 4-2
//! wavelet sparsity basis.
//!
//! All randomness flows through seeded ChaCha8 streams (see [`rng`]); every
//! experiment is reproducible from its seed at any thread count.

pub mod cli;
pub mod diagnostics;
pub mod ensembles;
mod error;
pub mod magtomo;
pub mod phase_lab;
pub mod problem_gen;
pub mod report;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};

pub use nalgebra::{DMatrix, DVector};
