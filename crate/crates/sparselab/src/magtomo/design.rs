//! Dense design matrix mapping wavelet coefficients of the stream function
//! to normal magnetic-field values at the sensors.
//!
//! Column `j` equals `biot_savart_normal(stream_to_current(cdf42_inverse(e_j)))`.
//! Assembly factors the pipeline: per-cell Biot-Savart influence coefficients
//! for the two tangential current components are folded with the difference
//! stencil of the curl into a sensors-by-cells operator, which is then
//! applied to each synthesized wavelet basis field. Columns are independent
//! and assembled in parallel.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::current::diff_stencil;
use super::geometry::{cross, dot, PatchGrid, SensorSet, MIN_SENSOR_DISTANCE, SHELL_THICKNESS};
use super::wavelet::cdf42_inverse_2d;
use crate::{Error, Result};

/// The sensors-by-coefficients forward operator, including the `mu0/4pi`
/// scaling. Column ordering is the row-major wavelet coefficient layout.
#[derive(Debug, Clone)]
pub struct TomoDesignMatrix {
    pub matrix: DMatrix<f64>,
    pub resolution: usize,
}

impl TomoDesignMatrix {
    /// Singular values, largest first.
    pub fn spectrum(&self) -> Vec<f64> {
        crate::ensembles::singular_spectrum(&self.matrix)
    }

    pub fn column_norms(&self) -> Vec<f64> {
        (0..self.matrix.ncols()).map(|c| self.matrix.column(c).norm()).collect()
    }

    /// Binary row-major dump: two little-endian u64 (rows, cols) then the
    /// entries as little-endian f64.
    pub fn write_binary<W: Write>(&self, w: &mut W) -> Result<()> {
        let (rows, cols) = self.matrix.shape();
        w.write_all(&(rows as u64).to_le_bytes())?;
        w.write_all(&(cols as u64).to_le_bytes())?;
        for r in 0..rows {
            for c in 0..cols {
                w.write_all(&self.matrix[(r, c)].to_le_bytes())?;
            }
        }
        Ok(())
    }
}

/// Sensors-by-cells influence operator applied to the contravariant current
/// components, folded with the curl stencil so it acts directly on
/// stream-function values.
fn stream_to_field_operator(grid: &PatchGrid, sensors: &SensorSet) -> Result<DMatrix<f64>> {
    let res = grid.resolution();
    let cells = res * res;
    let count = sensors.len();
    let h = grid.spacing();

    // Influence of each tangential current component at each cell.
    let mut infl_xi = DMatrix::<f64>::zeros(count, cells);
    let mut infl_eta = DMatrix::<f64>::zeros(count, cells);
    for (s, (pos, normal)) in sensors.positions.iter().zip(&sensors.normals).enumerate() {
        for (c, cell) in grid.cells().iter().enumerate() {
            let d = [
                pos[0] - cell.position[0],
                pos[1] - cell.position[1],
                pos[2] - cell.position[2],
            ];
            let dist2 = dot(&d, &d);
            if dist2 < MIN_SENSOR_DISTANCE * MIN_SENSOR_DISTANCE {
                return Err(Error::SingularKernel(pos[0], pos[1], pos[2]));
            }
            let w = 1e-7 * cell.area * SHELL_THICKNESS / (dist2 * dist2.sqrt());
            infl_xi[(s, c)] = w * dot(&cross(&cell.x_xi, &d), normal);
            infl_eta[(s, c)] = w * dot(&cross(&cell.x_eta, &d), normal);
        }
    }

    // Fold in the curl: J^xi = +D_eta(F)/sqrt_g, J^eta = -D_xi(F)/sqrt_g.
    let mut op = DMatrix::<f64>::zeros(count, cells);
    for i in 0..res {
        for j in 0..res {
            let c = i * res + j;
            let sg = grid.cell(i, j).sqrt_g;
            for (jj, weight) in diff_stencil(res, h, j) {
                let f_cell = i * res + jj;
                let scaled = weight / sg;
                for r in 0..count {
                    op[(r, f_cell)] += scaled * infl_xi[(r, c)];
                }
            }
            for (ii, weight) in diff_stencil(res, h, i) {
                let f_cell = ii * res + j;
                let scaled = -weight / sg;
                for r in 0..count {
                    op[(r, f_cell)] += scaled * infl_eta[(r, c)];
                }
            }
        }
    }
    Ok(op)
}

/// Assemble the dense design matrix for the given geometry and sensors.
pub fn build_design_matrix(grid: &PatchGrid, sensors: &SensorSet) -> Result<TomoDesignMatrix> {
    let res = grid.resolution();
    if !res.is_power_of_two() || res < 2 {
        return Err(Error::UnsupportedSize(res));
    }
    let cells = res * res;
    let count = sensors.len();
    let op = stream_to_field_operator(grid, sensors)?;

    let columns: Vec<Vec<f64>> = (0..cells)
        .into_par_iter()
        .map(|j| {
            let mut field = vec![0.0f64; cells];
            field[j] = 1.0;
            cdf42_inverse_2d(&mut field, res).expect("validated size");
            let f = DVector::from_vec(field);
            let mut col = DVector::<f64>::zeros(count);
            col.gemv(1.0, &op, &f, 0.0);
            col.as_slice().to_vec()
        })
        .collect();

    let mut matrix = DMatrix::<f64>::zeros(count, cells);
    for (j, col) in columns.iter().enumerate() {
        matrix.column_mut(j).copy_from_slice(col);
    }
    Ok(TomoDesignMatrix { matrix, resolution: res })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::magtomo::biot_savart::biot_savart_normal;
    use crate::magtomo::current::{stream_to_current, StreamField};
    use crate::magtomo::wavelet::cdf42_forward_2d;
    use rand::Rng;

    #[test]
    fn composition_consistency_on_random_fields() {
        let res = 16;
        let grid = PatchGrid::new(res).unwrap();
        let sensors = SensorSet::sample(40, 0.1, 3).unwrap();
        let design = build_design_matrix(&grid, &sensors).unwrap();

        let mut rng = crate::rng::stream(17);
        for _ in 0..3 {
            let values: Vec<f64> = (0..res * res).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let f = StreamField::new(res, values.clone()).unwrap();
            let direct =
                biot_savart_normal(&stream_to_current(&f, &grid).unwrap(), &grid, &sensors)
                    .unwrap();

            let mut coeffs = values;
            cdf42_forward_2d(&mut coeffs, res).unwrap();
            let via_matrix = &design.matrix * DVector::from_vec(coeffs);

            let scale = direct.iter().map(|v| v.abs()).fold(0.0f64, f64::max);
            for (a, b) in via_matrix.iter().zip(&direct) {
                assert!(
                    (a - b).abs() <= 1e-10 * scale,
                    "matrix {a:.6e} vs direct {b:.6e} (scale {scale:.3e})"
                );
            }
        }
    }

    #[test]
    fn binary_dump_has_expected_layout() {
        let res = 4;
        let grid = PatchGrid::new(res).unwrap();
        let sensors = SensorSet::sample(3, 0.1, 1).unwrap();
        let design = build_design_matrix(&grid, &sensors).unwrap();
        let mut buf = Vec::new();
        design.write_binary(&mut buf).unwrap();
        assert_eq!(buf.len(), 16 + 3 * 16 * 8);
        let rows = u64::from_le_bytes(buf[0..8].try_into().unwrap());
        let cols = u64::from_le_bytes(buf[8..16].try_into().unwrap());
        assert_eq!((rows, cols), (3, 16));
        let first = f64::from_le_bytes(buf[16..24].try_into().unwrap());
        assert_eq!(first, design.matrix[(0, 0)]);
    }

    #[test]
    fn non_power_of_two_resolution_is_rejected() {
        let grid = PatchGrid::new(12).unwrap();
        let sensors = SensorSet::sample(3, 0.1, 1).unwrap();
        assert!(build_design_matrix(&grid, &sensors).is_err());
    }
}
