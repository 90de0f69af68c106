//! Measurement-matrix ensembles with prescribed singular-value spectra.
//!
//! A parent matrix is an `n x n` dense matrix built from a standard Gaussian
//! draw. Type 1 keeps the Gaussian matrix itself; types 2 and 3 keep its
//! singular vectors but replace the singular values by a geometric law
//!
//! ```text
//! s_i = s1 * kappa^((1 - i) / (n - 1)),        i = 1..n     (type 2)
//! s_i = s1 * kappa^((1 - i^2) / (n^2 - 1)),    i = 1..n     (type 3)
//! ```
//!
//! so that `s1 / sn = kappa` for both laws. Measurement matrices are formed
//! by sampling `m` distinct rows of a parent uniformly without replacement;
//! their spectra flatten as `m` shrinks, mimicking matrices met in practical
//! inverse problems.

use nalgebra::DMatrix;
#[cfg(test)]
use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::rng::stream;
use crate::{Error, Result};

/// Which singular-value law a parent matrix follows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SpectrumKind {
    /// Plain standard-normal matrix; spectrum left as drawn.
    Type1,
    /// Geometric decay, `s_i = s1 * kappa^((1-i)/(n-1))`.
    Type2,
    /// Gaussian-profile decay, `s_i = s1 * kappa^((1-i^2)/(n^2-1))`.
    Type3,
}

/// Full description of a spectrum law: the kind, its condition target
/// `kappa` (ignored for type 1) and the largest singular value `s1`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SpectrumSpec {
    pub kind: SpectrumKind,
    pub kappa: f64,
    pub s1: f64,
}

impl SpectrumSpec {
    pub fn type1() -> Self {
        Self { kind: SpectrumKind::Type1, kappa: 1.0, s1: 1.0 }
    }

    pub fn type2(kappa: f64) -> Self {
        Self { kind: SpectrumKind::Type2, kappa, s1: 1.0 }
    }

    pub fn type3(kappa: f64) -> Self {
        Self { kind: SpectrumKind::Type3, kappa, s1: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s1 > 0.0) {
            return Err(Error::InvalidConfig(format!("s1 must be positive, got {}", self.s1)));
        }
        if self.kind != SpectrumKind::Type1 && !(self.kappa > 1.0) {
            return Err(Error::InvalidConfig(format!(
                "kappa must exceed 1 for type 2/3 spectra, got {}",
                self.kappa
            )));
        }
        Ok(())
    }

    /// The prescribed singular values for an `n x n` parent, largest first.
    /// `None` for type 1, whose spectrum is whatever the Gaussian draw gives.
    pub fn law(&self, n: usize) -> Option<Vec<f64>> {
        let nf = n as f64;
        match self.kind {
            SpectrumKind::Type1 => None,
            SpectrumKind::Type2 => Some(
                (1..=n)
                    .map(|i| self.s1 * self.kappa.powf((1.0 - i as f64) / (nf - 1.0)))
                    .collect(),
            ),
            SpectrumKind::Type3 => Some(
                (1..=n)
                    .map(|i| {
                        let i = i as f64;
                        self.s1 * self.kappa.powf((1.0 - i * i) / (nf * nf - 1.0))
                    })
                    .collect(),
            ),
        }
    }

    /// Short identifier used in file headers ("type1", "type2", "type3").
    pub fn kind_label(&self) -> &'static str {
        match self.kind {
            SpectrumKind::Type1 => "type1",
            SpectrumKind::Type2 => "type2",
            SpectrumKind::Type3 => "type3",
        }
    }
}

/// An `n x n` parent matrix together with the spec and seed that made it.
#[derive(Debug, Clone)]
pub struct ParentMatrix {
    entries: DMatrix<f64>,
    spec: SpectrumSpec,
    seed: u64,
}

impl ParentMatrix {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn spec(&self) -> &SpectrumSpec {
        &self.spec
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn singular_spectrum(&self) -> Vec<f64> {
        singular_spectrum(&self.entries)
    }
}

/// `m` distinct rows of a parent, in sampled order.
#[derive(Debug, Clone)]
pub struct MeasurementMatrix {
    entries: DMatrix<f64>,
    row_indices: Vec<usize>,
    parent_spec: SpectrumSpec,
}

impl MeasurementMatrix {
    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn nrows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.entries.ncols()
    }

    /// Parent rows that were sampled, in order.
    pub fn row_indices(&self) -> &[usize] {
        &self.row_indices
    }

    pub fn parent_spec(&self) -> &SpectrumSpec {
        &self.parent_spec
    }

    pub fn singular_spectrum(&self) -> Vec<f64> {
        singular_spectrum(&self.entries)
    }

    /// Build directly from parts; used by the instance bundle loader.
    pub fn from_parts(
        entries: DMatrix<f64>,
        row_indices: Vec<usize>,
        parent_spec: SpectrumSpec,
    ) -> Self {
        Self { entries, row_indices, parent_spec }
    }
}

/// Generate an `n x n` parent matrix for the given spectrum spec.
///
/// Type 1 returns the standard-normal draw itself. Types 2 and 3 compute the
/// SVD of the draw, keep the singular vectors, and substitute the prescribed
/// law. The factorization is rejected if it fails to reconstruct the draw to
/// `1e-10` relative in Frobenius norm.
pub fn gen_parent(n: usize, spec: &SpectrumSpec, seed: u64) -> Result<ParentMatrix> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!("parent size must be >= 2, got {n}")));
    }
    spec.validate()?;

    let mut rng = stream(seed);
    // Column-major fill order; part of the reproducibility contract.
    let gauss = DMatrix::<f64>::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));

    let entries = match spec.law(n) {
        None => gauss,
        Some(law) => {
            let svd = gauss.clone().svd(true, true);
            let u = svd.u.as_ref().expect("svd with u");
            let v_t = svd.v_t.as_ref().expect("svd with v_t");
            // nalgebra does not sort singular values; order them descending.
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| {
                svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap()
            });

            // Reconstruction check in the original (unsorted) order.
            let mut scaled = u.clone();
            for c in 0..n {
                scaled.column_mut(c).scale_mut(svd.singular_values[c]);
            }
            let err = (&scaled * v_t - &gauss).norm();
            if err > 1e-10 * gauss.norm() {
                return Err(Error::Numerical(format!(
                    "SVD reconstruction error {:.3e} exceeds 1e-10 * ||M||",
                    err / gauss.norm()
                )));
            }

            // U_sorted * diag(law) * Vt_sorted
            let mut u_scaled = DMatrix::<f64>::zeros(n, n);
            let mut vt_sorted = DMatrix::<f64>::zeros(n, n);
            for (pos, &oi) in order.iter().enumerate() {
                let mut col = u_scaled.column_mut(pos);
                col.copy_from(&u.column(oi));
                col.scale_mut(law[pos]);
                vt_sorted.row_mut(pos).copy_from(&v_t.row(oi));
            }
            &u_scaled * &vt_sorted
        }
    };

    Ok(ParentMatrix { entries, spec: *spec, seed })
}

/// Sample `m` distinct rows of `parent` uniformly without replacement
/// (seeded Fisher-Yates partial shuffle); rows are copied verbatim in the
/// sampled order.
pub fn subsample_rows(parent: &ParentMatrix, m: usize, seed: u64) -> Result<MeasurementMatrix> {
    let n = parent.n();
    if m < 1 || m > n {
        return Err(Error::InvalidDimension(format!(
            "row count must satisfy 1 <= m <= {n}, got {m}"
        )));
    }
    let mut rng = stream(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..m {
        let j = rng.gen_range(i..n);
        idx.swap(i, j);
    }
    idx.truncate(m);

    let mut entries = DMatrix::<f64>::zeros(m, n);
    for (r, &pi) in idx.iter().enumerate() {
        entries.row_mut(r).copy_from(&parent.entries.row(pi));
    }
    Ok(MeasurementMatrix { entries, row_indices: idx, parent_spec: parent.spec })
}

/// Singular values of a dense matrix, sorted descending.
pub fn singular_spectrum(m: &DMatrix<f64>) -> Vec<f64> {
    let svd = m.clone().svd(false, false);
    let mut s: Vec<f64> = svd.singular_values.iter().cloned().collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Spectrum divided by its largest value. Returns an all-zero vector for a
/// zero matrix.
pub fn normalized_spectrum(spectrum: &[f64]) -> Vec<f64> {
    match spectrum.first() {
        Some(&s1) if s1 > 0.0 => spectrum.iter().map(|s| s / s1).collect(),
        _ => spectrum.to_vec(),
    }
}

/// Mean of per-matrix normalized subsample spectra over `repeats` fresh
/// parents. Each repeat generates a parent from `derive_seed(seed, [PARENT,
/// r])`, subsamples `m` rows with `derive_seed(seed, [ROWS, r])`, normalizes
/// that spectrum by its own largest value, then averages across repeats.
pub fn mean_normalized_subsample_spectrum(
    n: usize,
    spec: &SpectrumSpec,
    m: usize,
    repeats: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    use crate::rng::{derive_seed, tags};
    let mut acc = vec![0.0f64; m];
    for r in 0..repeats {
        let parent = gen_parent(n, spec, derive_seed(seed, &[tags::PARENT, r as u64]))?;
        let sub = subsample_rows(&parent, m, derive_seed(seed, &[tags::ROWS, r as u64]))?;
        let ns = normalized_spectrum(&sub.singular_spectrum());
        for (a, v) in acc.iter_mut().zip(ns) {
            *a += v;
        }
    }
    for a in &mut acc {
        *a /= repeats as f64;
    }
    Ok(acc)
}
