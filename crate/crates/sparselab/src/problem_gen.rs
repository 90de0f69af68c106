//! Sparse ground-truth signals and noisy synthetic data.
//!
//! Signals have exactly `k` nonzeros at uniformly drawn positions, with
//! values uniform on [-1, 1] (redrawing anything below 1e-6 in magnitude so
//! the signal is never effectively sparser than requested). Data are
//! `y = K x0 + eta` with Gaussian noise rescaled to an exact relative level
//! `epsilon = ||eta|| / ||K x0||`.

use std::io::{BufRead, Write};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::ensembles::{MeasurementMatrix, SpectrumKind, SpectrumSpec};
use crate::rng::stream;
use crate::{Error, Result};

/// Smallest admissible magnitude for a nonzero signal entry.
pub const MIN_NONZERO: f64 = 1e-6;

/// A length-`n` signal with exactly `k` nonzeros.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSignal {
    n: usize,
    support: Vec<usize>,
    values: Vec<f64>,
}

impl SparseSignal {
    /// Build from explicit support and values; validates the invariants.
    pub fn new(n: usize, support: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if support.is_empty() || support.len() != values.len() {
            return Err(Error::InvalidSparsity(
                "support and values must be nonempty and equal-length".into(),
            ));
        }
        let mut seen = vec![false; n];
        for &i in &support {
            if i >= n || seen[i] {
                return Err(Error::InvalidSparsity(format!("bad or duplicate index {i}")));
            }
            seen[i] = true;
        }
        if values.iter().any(|v| *v == 0.0 || !v.is_finite()) {
            return Err(Error::InvalidSparsity("support values must be finite nonzeros".into()));
        }
        Ok(Self { n, support, values })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.support.len()
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Dense length-`n` view.
    pub fn dense(&self) -> DVector<f64> {
        let mut x = DVector::zeros(self.n);
        for (&i, &v) in self.support.iter().zip(&self.values) {
            x[i] = v;
        }
        x
    }

    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// A fully materialized trial: matrix, signal, noise, data, noise level.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub matrix: MeasurementMatrix,
    pub signal: SparseSignal,
    pub noise: DVector<f64>,
    pub data: DVector<f64>,
    pub epsilon: f64,
}

impl ProblemInstance {
    pub fn noise_norm(&self) -> f64 {
        self.noise.norm()
    }

    /// Noise level recomputed from the stored vectors.
    pub fn realized_epsilon(&self) -> f64 {
        let kx0 = self.matrix.entries() * self.signal.dense();
        let denom = kx0.norm();
        if denom == 0.0 {
            0.0
        } else {
            self.noise.norm() / denom
        }
    }
}

/// Draw a `k`-sparse signal of dimension `n`: support uniform without
/// replacement, values i.i.d. uniform on [-1, 1] with magnitudes below
/// [`MIN_NONZERO`] redrawn.
pub fn gen_signal(n: usize, k: usize, seed: u64) -> Result<SparseSignal> {
    if k < 1 || k > n {
        return Err(Error::InvalidSparsity(format!("need 1 <= k <= {n}, got {k}")));
    }
    let mut rng = stream(seed);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.gen_range(i..n);
        idx.swap(i, j);
    }
    idx.truncate(k);
    idx.sort_unstable();

    let mut values = Vec::with_capacity(k);
    for _ in 0..k {
        loop {
            let v: f64 = rng.gen_range(-1.0..1.0);
            if v.abs() >= MIN_NONZERO {
                values.push(v);
                break;
            }
        }
    }
    SparseSignal::new(n, idx, values)
}

/// Draw Gaussian noise for a clean data vector and rescale it so that
/// `||eta|| = epsilon * ||kx0||` exactly. Returns the zero vector when
/// `epsilon == 0`.
pub fn draw_noise(kx0: &DVector<f64>, epsilon: f64, seed: u64) -> Result<DVector<f64>> {
    if epsilon < 0.0 {
        return Err(Error::InvalidConfig(format!("epsilon must be >= 0, got {epsilon}")));
    }
    let m = kx0.len();
    if epsilon == 0.0 {
        return Ok(DVector::zeros(m));
    }
    let signal_norm = kx0.norm();
    if signal_norm == 0.0 {
        return Err(Error::DegenerateSignal);
    }
    let mut rng = stream(seed);
    let mut eta = DVector::from_fn(m, |_, _| StandardNormal.sample(&mut rng));
    let raw = eta.norm();
    if raw == 0.0 {
        return Err(Error::Numerical("drew an exactly zero noise vector".into()));
    }
    eta.scale_mut(epsilon * signal_norm / raw);
    Ok(eta)
}

/// Assemble a noisy instance `y = K x0 + eta` at relative noise level
/// `epsilon`.
pub fn synthesize(
    matrix: MeasurementMatrix,
    signal: &SparseSignal,
    epsilon: f64,
    seed: u64,
) -> Result<ProblemInstance> {
    if signal.n() != matrix.ncols() {
        return Err(Error::InvalidDimension(format!(
            "signal dimension {} does not match matrix columns {}",
            signal.n(),
            matrix.ncols()
        )));
    }
    let kx0 = matrix.entries() * signal.dense();
    let noise = draw_noise(&kx0, epsilon, seed)?;
    let data = &kx0 + &noise;
    Ok(ProblemInstance { matrix, signal: signal.clone(), noise, data, epsilon })
}

/// Relative reconstruction error `||x_hat - x0|| / ||x0||`.
pub fn relative_error(x_hat: &DVector<f64>, x0: &SparseSignal) -> Result<f64> {
    if x_hat.len() != x0.n() {
        return Err(Error::InvalidDimension(format!(
            "estimate length {} does not match signal dimension {}",
            x_hat.len(),
            x0.n()
        )));
    }
    let denom = x0.norm();
    if denom == 0.0 {
        return Err(Error::ZeroGroundTruth);
    }
    Ok((x_hat - x0.dense()).norm() / denom)
}

// ---------------------------------------------------------------------------
// Instance bundle: a flat CSV dump that replays a trial exactly. Floats are
// written with Rust's shortest round-trip formatting, so reading the bundle
// back reproduces bit-identical values.
// ---------------------------------------------------------------------------

impl ProblemInstance {
    /// Write the instance as a CSV bundle. `header` entries become leading
    /// `# key = value` comment lines (callers record seeds and config there).
    pub fn write_bundle<W: Write>(&self, w: &mut W, header: &[(String, String)]) -> Result<()> {
        for (k, v) in header {
            writeln!(w, "# {k} = {v}")?;
        }
        let (m, n) = (self.matrix.nrows(), self.matrix.ncols());
        writeln!(w, "record,i,j,value")?;
        writeln!(w, "dims,{m},{n},")?;
        writeln!(w, "epsilon,,,{}", self.epsilon)?;
        let spec = self.matrix.parent_spec();
        writeln!(w, "spec,,,{}", spec.kind_label())?;
        writeln!(w, "kappa,,,{}", spec.kappa)?;
        writeln!(w, "s1,,,{}", spec.s1)?;
        for (r, &pi) in self.matrix.row_indices().iter().enumerate() {
            writeln!(w, "row_index,{r},,{pi}")?;
        }
        let e = self.matrix.entries();
        for r in 0..m {
            for c in 0..n {
                writeln!(w, "matrix,{r},{c},{}", e[(r, c)])?;
            }
        }
        for (j, (&i, &v)) in self.signal.support().iter().zip(self.signal.values()).enumerate() {
            writeln!(w, "support,{j},{i},{v}")?;
        }
        for (i, v) in self.noise.iter().enumerate() {
            writeln!(w, "noise,{i},,{v}")?;
        }
        for (i, v) in self.data.iter().enumerate() {
            writeln!(w, "data,{i},,{v}")?;
        }
        Ok(())
    }

    /// Read a bundle produced by [`ProblemInstance::write_bundle`].
    pub fn read_bundle<R: BufRead>(r: R) -> Result<Self> {
        let mut m = 0usize;
        let mut n = 0usize;
        let mut epsilon = 0.0f64;
        let mut kind = SpectrumKind::Type1;
        let mut kappa = 1.0f64;
        let mut s1 = 1.0f64;
        let mut row_indices: Vec<usize> = Vec::new();
        let mut entries: Vec<(usize, usize, f64)> = Vec::new();
        let mut support: Vec<(usize, f64)> = Vec::new();
        let mut noise: Vec<f64> = Vec::new();
        let mut data: Vec<f64> = Vec::new();

        let bad = |line: &str| Error::Parse(format!("bad bundle line: {line}"));
        for line in r.lines() {
            let line = line?;
            if line.starts_with('#') || line.is_empty() || line.starts_with("record,") {
                continue;
            }
            let parts: Vec<&str> = line.splitn(4, ',').collect();
            if parts.len() != 4 {
                return Err(bad(&line));
            }
            let (tag, i, j, v) = (parts[0], parts[1], parts[2], parts[3]);
            match tag {
                "dims" => {
                    m = i.parse().map_err(|_| bad(&line))?;
                    n = j.parse().map_err(|_| bad(&line))?;
                }
                "epsilon" => epsilon = v.parse().map_err(|_| bad(&line))?,
                "spec" => {
                    kind = match v {
                        "type1" => SpectrumKind::Type1,
                        "type2" => SpectrumKind::Type2,
                        "type3" => SpectrumKind::Type3,
                        _ => return Err(bad(&line)),
                    }
                }
                "kappa" => kappa = v.parse().map_err(|_| bad(&line))?,
                "s1" => s1 = v.parse().map_err(|_| bad(&line))?,
                "row_index" => row_indices.push(v.parse().map_err(|_| bad(&line))?),
                "matrix" => entries.push((
                    i.parse().map_err(|_| bad(&line))?,
                    j.parse().map_err(|_| bad(&line))?,
                    v.parse().map_err(|_| bad(&line))?,
                )),
                "support" => support.push((
                    j.parse().map_err(|_| bad(&line))?,
                    v.parse().map_err(|_| bad(&line))?,
                )),
                "noise" => noise.push(v.parse().map_err(|_| bad(&line))?),
                "data" => data.push(v.parse().map_err(|_| bad(&line))?),
                _ => return Err(bad(&line)),
            }
        }

        if noise.len() != m || data.len() != m || entries.len() != m * n {
            return Err(Error::Parse("bundle is incomplete".into()));
        }
        let mut mat = DMatrix::<f64>::zeros(m, n);
        for (r, c, v) in entries {
            mat[(r, c)] = v;
        }
        let spec = SpectrumSpec { kind, kappa, s1 };
        let matrix = MeasurementMatrix::from_parts(mat, row_indices, spec);
        let (idx, vals): (Vec<usize>, Vec<f64>) = support.into_iter().unzip();
        let signal = SparseSignal::new(n, idx, vals)?;
        Ok(ProblemInstance {
            matrix,
            signal,
            noise: DVector::from_vec(noise),
            data: DVector::from_vec(data),
            epsilon,
        })
    }
}
