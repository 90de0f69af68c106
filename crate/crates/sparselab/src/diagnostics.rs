//! Condition-number diagnostics for column submatrices.
//!
//! When a matrix acts nearly isometrically on all `2k`-sparse vectors, the
//! condition numbers of its `2k`-column submatrices are bounded by
//! `sqrt((10 + sqrt(7)) / (2 + sqrt(7))) ~= 1.6498`. Sampling random column
//! submatrices and recording their condition numbers therefore shows how far
//! an ensemble sits from that regime.

use nalgebra::DMatrix;
use rand::Rng;

use crate::rng::{derive_seed, stream, tags};
use crate::{Error, Result};

/// Condition-number statistics over sampled column submatrices.
#[derive(Debug, Clone)]
pub struct SubmatrixConditionReport {
    pub columns_per_sample: usize,
    pub samples: usize,
    pub mean_kappa: f64,
    pub max_kappa: f64,
    pub min_kappa: f64,
    /// Rank-deficient draws (smallest singular value exactly zero). These are
    /// excluded from the mean but counted here; `max_kappa` is infinite when
    /// any occur.
    pub infinite_count: usize,
    pub seed: u64,
}

impl SubmatrixConditionReport {
    /// CSV line matching the schema `columns,samples,mean,max,min,infinite_count`.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.columns_per_sample,
            self.samples,
            self.mean_kappa,
            self.max_kappa,
            self.min_kappa,
            self.infinite_count
        )
    }
}

/// The condition-number bound implied by a restricted isometry with the
/// critical constant: `sqrt((10 + sqrt(7)) / (2 + sqrt(7)))`.
pub fn rip_bound_constant() -> f64 {
    ((10.0 + 7.0f64.sqrt()) / (2.0 + 7.0f64.sqrt())).sqrt()
}

/// Sample `samples` random `columns`-column submatrices of `k` (columns drawn
/// uniformly without replacement, fresh per sample) and report the statistics
/// of their condition numbers `sigma_max / sigma_min`.
pub fn sample_condition_numbers(
    k: &DMatrix<f64>,
    columns: usize,
    samples: usize,
    seed: u64,
) -> Result<SubmatrixConditionReport> {
    let n = k.ncols();
    let m = k.nrows();
    if columns < 1 || columns > n {
        return Err(Error::InvalidDimension(format!(
            "need 1 <= columns <= {n}, got {columns}"
        )));
    }
    if samples < 1 {
        return Err(Error::InvalidConfig("need at least one sample".into()));
    }

    let mut sum = 0.0f64;
    let mut finite = 0usize;
    let mut infinite = 0usize;
    let mut max_kappa = 0.0f64;
    let mut min_kappa = f64::INFINITY;
    let mut sub = DMatrix::<f64>::zeros(m, columns);
    let mut idx: Vec<usize> = (0..n).collect();

    for s in 0..samples {
        let mut rng = stream(derive_seed(seed, &[tags::SAMPLE, s as u64]));
        for i in 0..columns {
            let j = rng.gen_range(i..n);
            idx.swap(i, j);
        }
        for (c, &col) in idx[..columns].iter().enumerate() {
            sub.column_mut(c).copy_from(&k.column(col));
        }
        // Restore ascending order so the next partial shuffle stays uniform.
        idx.sort_unstable();

        let svd = sub.clone().svd(false, false);
        let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
        let smin = svd.singular_values.iter().cloned().fold(f64::INFINITY, f64::min);
        if smin == 0.0 {
            infinite += 1;
            max_kappa = f64::INFINITY;
            continue;
        }
        let kappa = smax / smin;
        sum += kappa;
        finite += 1;
        max_kappa = max_kappa.max(kappa);
        min_kappa = min_kappa.min(kappa);
    }

    if finite == 0 {
        return Err(Error::Numerical("every sampled submatrix was rank-deficient".into()));
    }
    Ok(SubmatrixConditionReport {
        columns_per_sample: columns,
        samples,
        mean_kappa: sum / finite as f64,
        max_kappa,
        min_kappa,
        infinite_count: infinite,
        seed,
    })
}

/// The `order x 2*order` matrix `[I | H/sqrt(order)]` where `H` is the
/// Sylvester Hadamard matrix; every column has unit Euclidean norm.
pub fn identity_hadamard_matrix(order: usize) -> Result<DMatrix<f64>> {
    if order == 0 || !order.is_power_of_two() {
        return Err(Error::UnsupportedOrder(order));
    }
    let mut h = DMatrix::<f64>::from_element(1, 1, 1.0);
    let mut sz = 1;
    while sz < order {
        let mut next = DMatrix::<f64>::zeros(2 * sz, 2 * sz);
        for r in 0..sz {
            for c in 0..sz {
                let v = h[(r, c)];
                next[(r, c)] = v;
                next[(r, c + sz)] = v;
                next[(r + sz, c)] = v;
                next[(r + sz, c + sz)] = -v;
            }
        }
        h = next;
        sz *= 2;
    }
    let scale = 1.0 / (order as f64).sqrt();
    Ok(DMatrix::from_fn(order, 2 * order, |r, c| {
        if c < order {
            if r == c {
                1.0
            } else {
                0.0
            }
        } else {
            h[(r, c - order)] * scale
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bound_constant_value() {
        let v = rip_bound_constant();
        assert!((v - 1.6498).abs() < 1e-4, "got {v}");
        let sq = v * v;
        assert!((sq - (10.0 + 7.0f64.sqrt()) / (2.0 + 7.0f64.sqrt())).abs() <= 1e-15);
        assert!(v > 1.0);
    }

    #[test]
    fn identity_columns_have_unit_condition() {
        let id = DMatrix::<f64>::identity(6, 6);
        let rep = sample_condition_numbers(&id, 1, 20, 3).unwrap();
        assert_eq!(rep.infinite_count, 0);
        assert!((rep.mean_kappa - 1.0).abs() <= 1e-12);
        assert!((rep.max_kappa - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn orthonormal_submatrices_have_unit_condition() {
        let id = DMatrix::<f64>::identity(8, 8);
        let rep = sample_condition_numbers(&id, 3, 50, 4).unwrap();
        assert!((rep.mean_kappa - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn rank_deficient_samples_are_counted_separately() {
        // A zero column forces an exactly zero singular value in any sample
        // containing it.
        let mut k = DMatrix::<f64>::zeros(3, 3);
        k.column_mut(0).copy_from_slice(&[1.0, 0.0, 0.0]);
        // column 1 stays zero
        k.column_mut(2).copy_from_slice(&[0.0, 1.0, 0.0]);
        let rep = sample_condition_numbers(&k, 2, 40, 1).unwrap();
        assert!(rep.infinite_count > 0);
        assert!(rep.max_kappa.is_infinite());
        assert!(rep.mean_kappa.is_finite());

        let zeros = DMatrix::<f64>::zeros(3, 2);
        assert!(sample_condition_numbers(&zeros, 2, 5, 1).is_err());
    }

    #[test]
    fn kappa_invariant_under_sign_flips_and_permutations() {
        use crate::ensembles::singular_spectrum;
        let k = DMatrix::<f64>::from_fn(5, 3, |r, c| ((r * 3 + c * 7) % 11) as f64 - 5.0);
        let sv = singular_spectrum(&k);
        let kappa = sv[0] / sv[2];
        let mut flipped = k.clone();
        flipped.column_mut(1).scale_mut(-1.0);
        let mut permuted = DMatrix::<f64>::zeros(5, 3);
        permuted.column_mut(0).copy_from(&k.column(2));
        permuted.column_mut(1).copy_from(&k.column(0));
        permuted.column_mut(2).copy_from(&k.column(1));
        for m in [flipped, permuted] {
            let sv2 = singular_spectrum(&m);
            assert!((sv2[0] / sv2[2] - kappa).abs() <= 1e-12 * kappa);
        }
    }

    #[test]
    fn hadamard_construction() {
        let m = identity_hadamard_matrix(2).unwrap();
        let s = 1.0 / 2.0f64.sqrt();
        let expect = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, s, s, 0.0, 1.0, s, -s]);
        assert!((m - expect).amax() <= 1e-15);
        // Unit column norms at a larger order.
        let m = identity_hadamard_matrix(64).unwrap();
        for c in 0..m.ncols() {
            assert!((m.column(c).norm() - 1.0).abs() <= 1e-15);
        }
        assert!(identity_hadamard_matrix(12).is_err());
        assert!(identity_hadamard_matrix(0).is_err());
    }

    #[test]
    fn reports_are_deterministic() {
        let k = identity_hadamard_matrix(16).unwrap();
        let a = sample_condition_numbers(&k, 4, 100, 9).unwrap();
        let b = sample_condition_numbers(&k, 4, 100, 9).unwrap();
        assert_eq!(a.mean_kappa, b.mean_kappa);
        assert_eq!(a.max_kappa, b.max_kappa);
        assert_eq!(a.min_kappa, b.min_kappa);
    }
}
