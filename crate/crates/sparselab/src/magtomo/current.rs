//! Divergence-free surface currents from a stream function.
//!
//! `J = curl(F * r_hat)` on the patch has contravariant chart components
//!
//! ```text
//! J^xi = +D_eta(F) / sqrt(g),    J^eta = -D_xi(F) / sqrt(g),
//! ```
//!
//! with centered differences in the interior and one-sided differences at
//! the patch edges. The discrete surface divergence uses the same difference
//! operators, so `div(curl(F)) = (D_xi D_eta - D_eta D_xi) F / sqrt(g) = 0`
//! holds by construction (the 1-D stencils act along different axes and
//! commute exactly).

use super::geometry::{PatchGrid, Vec3};
use crate::{Error, Result};

/// Scalar stream function sampled at cell centers, row-major
/// (`i * resolution + j`).
#[derive(Debug, Clone, PartialEq)]
pub struct StreamField {
    resolution: usize,
    values: Vec<f64>,
}

impl StreamField {
    pub fn new(resolution: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != resolution * resolution {
            return Err(Error::InvalidDimension(format!(
                "stream field needs {} values, got {}",
                resolution * resolution,
                values.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig("stream field values must be finite".into()));
        }
        Ok(Self { resolution, values })
    }

    pub fn zeros(resolution: usize) -> Self {
        Self { resolution, values: vec![0.0; resolution * resolution] }
    }

    pub fn constant(resolution: usize, value: f64) -> Self {
        Self { resolution, values: vec![value; resolution * resolution] }
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.resolution + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.values[i * self.resolution + j] = v;
    }
}

/// Tangential current density per cell: Cartesian 3-vectors plus the chart
/// components they were built from.
#[derive(Debug, Clone)]
pub struct CurrentField {
    pub(crate) resolution: usize,
    /// Cartesian J at each cell (A/m^2).
    pub vectors: Vec<Vec3>,
    /// Contravariant chart components `(J^xi, J^eta)` at each cell.
    pub components: Vec<(f64, f64)>,
}

impl CurrentField {
    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn max_norm(&self) -> f64 {
        self.vectors
            .iter()
            .map(|v| super::geometry::norm(v))
            .fold(0.0f64, f64::max)
    }
}

/// Difference stencil along one axis at position `coord`: `(index, weight)`
/// pairs with `D(F) = sum w * F[index]`. Centered in the interior, one-sided
/// at the edges. Shared with the design-matrix assembly so the two paths use
/// the identical operator.
pub(crate) fn diff_stencil(res: usize, h: f64, coord: usize) -> [(usize, f64); 2] {
    if coord == 0 {
        [(1, 1.0 / h), (0, -1.0 / h)]
    } else if coord == res - 1 {
        [(res - 1, 1.0 / h), (res - 2, -1.0 / h)]
    } else {
        [(coord + 1, 0.5 / h), (coord - 1, -0.5 / h)]
    }
}

/// Derivative along `xi` (axis 0) or `eta` (axis 1).
fn diff(values: &[f64], res: usize, h: f64, i: usize, j: usize, axis: usize) -> f64 {
    let coord = if axis == 0 { i } else { j };
    diff_stencil(res, h, coord)
        .iter()
        .map(|&(idx, w)| {
            w * if axis == 0 { values[idx * res + j] } else { values[i * res + idx] }
        })
        .sum()
}

/// Build the divergence-free current field from a stream function.
pub fn stream_to_current(f: &StreamField, grid: &PatchGrid) -> Result<CurrentField> {
    let res = grid.resolution();
    if f.resolution() != res {
        return Err(Error::InvalidDimension(format!(
            "stream field resolution {} does not match grid {}",
            f.resolution(),
            res
        )));
    }
    let h = grid.spacing();
    let mut vectors = Vec::with_capacity(res * res);
    let mut components = Vec::with_capacity(res * res);
    for i in 0..res {
        for j in 0..res {
            let cell = grid.cell(i, j);
            let d_xi = diff(f.values(), res, h, i, j, 0);
            let d_eta = diff(f.values(), res, h, i, j, 1);
            let j_xi = d_eta / cell.sqrt_g;
            let j_eta = -d_xi / cell.sqrt_g;
            let v = [
                j_xi * cell.x_xi[0] + j_eta * cell.x_eta[0],
                j_xi * cell.x_xi[1] + j_eta * cell.x_eta[1],
                j_xi * cell.x_xi[2] + j_eta * cell.x_eta[2],
            ];
            vectors.push(v);
            components.push((j_xi, j_eta));
        }
    }
    Ok(CurrentField { resolution: res, vectors, components })
}

/// Discrete surface divergence of a tangential vector field given by its
/// Cartesian per-cell vectors. The chart components are recovered through the
/// metric, then `div = (D_xi(sqrt_g V^xi) + D_eta(sqrt_g V^eta)) / sqrt_g`.
pub fn surface_divergence(field: &CurrentField, grid: &PatchGrid) -> Result<Vec<f64>> {
    let res = grid.resolution();
    if field.resolution() != res {
        return Err(Error::InvalidDimension("current field does not match grid".into()));
    }
    let h = grid.spacing();
    let mut flux_xi = vec![0.0; res * res];
    let mut flux_eta = vec![0.0; res * res];
    for (idx, cell) in grid.cells().iter().enumerate() {
        let v = &field.vectors[idx];
        // Covariant components, then raise with the inverse metric.
        let c_xi = super::geometry::dot(v, &cell.x_xi);
        let c_eta = super::geometry::dot(v, &cell.x_eta);
        let (e, f_, g) = cell.metric;
        let det = e * g - f_ * f_;
        let v_xi = (g * c_xi - f_ * c_eta) / det;
        let v_eta = (e * c_eta - f_ * c_xi) / det;
        flux_xi[idx] = cell.sqrt_g * v_xi;
        flux_eta[idx] = cell.sqrt_g * v_eta;
    }
    let mut div = vec![0.0; res * res];
    for i in 0..res {
        for j in 0..res {
            let d = diff(&flux_xi, res, h, i, j, 0) + diff(&flux_eta, res, h, i, j, 1);
            div[i * res + j] = d / grid.cell(i, j).sqrt_g;
        }
    }
    Ok(div)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::magtomo::geometry::{dot, norm};

    #[test]
    fn constant_stream_function_gives_zero_current() {
        let grid = PatchGrid::new(12).unwrap();
        let f = StreamField::constant(12, 3.7);
        let j = stream_to_current(&f, &grid).unwrap();
        assert_eq!(j.max_norm(), 0.0);
    }

    #[test]
    fn delta_stream_function_circulates_locally() {
        let res = 16;
        let grid = PatchGrid::new(res).unwrap();
        let mut f = StreamField::zeros(res);
        f.set(8, 8, 1.0);
        let j = stream_to_current(&f, &grid).unwrap();
        for i in 0..res {
            for jdx in 0..res {
                let v = &j.vectors[i * res + jdx];
                let nz = norm(v) > 0.0;
                let near = (i as i64 - 8).abs() <= 1 && (jdx as i64 - 8).abs() <= 1;
                if nz {
                    assert!(near, "nonzero current away from the bump at ({i},{jdx})");
                }
            }
        }
        // The four direct neighbors carry the circulation.
        assert!(norm(&j.vectors[7 * res + 8]) > 0.0);
        assert!(norm(&j.vectors[9 * res + 8]) > 0.0);
        assert!(norm(&j.vectors[8 * res + 7]) > 0.0);
        assert!(norm(&j.vectors[8 * res + 9]) > 0.0);
    }

    #[test]
    fn current_is_tangential() {
        let res = 24;
        let grid = PatchGrid::new(res).unwrap();
        let values: Vec<f64> = (0..res * res)
            .map(|k| {
                let (i, j) = (k / res, k % res);
                ((i as f64) * 0.37).sin() * ((j as f64) * 0.23).cos()
            })
            .collect();
        let f = StreamField::new(res, values).unwrap();
        let j = stream_to_current(&f, &grid).unwrap();
        let jmax = j.max_norm();
        for (v, cell) in j.vectors.iter().zip(grid.cells()) {
            let radial = dot(v, &cell.normal).abs();
            assert!(radial <= 1e-12 * jmax, "radial component {radial}");
        }
    }

    #[test]
    fn discrete_divergence_vanishes() {
        let res = 32;
        let grid = PatchGrid::new(res).unwrap();
        let values: Vec<f64> = (0..res * res)
            .map(|k| {
                let (i, j) = (k / res, k % res);
                ((i as f64) * 0.21).cos() + ((j as f64) * 0.43).sin() * (i as f64 + 1.0) * 0.05
            })
            .collect();
        let f = StreamField::new(res, values).unwrap();
        let j = stream_to_current(&f, &grid).unwrap();
        let div = surface_divergence(&j, &grid).unwrap();
        let jmax = j.max_norm();
        let dmax = div.iter().cloned().map(f64::abs).fold(0.0f64, f64::max);
        // Relative to ||J|| / length-scale to keep units consistent.
        assert!(
            dmax <= 1e-8 * jmax / grid.spacing(),
            "max divergence {dmax} vs current scale {jmax}"
        );
    }
}
