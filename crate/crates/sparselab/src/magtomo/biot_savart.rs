//! Biot-Savart forward model: normal magnetic-field components at sensors.

use super::current::CurrentField;
use super::geometry::{cross, dot, PatchGrid, SensorSet, MIN_SENSOR_DISTANCE, SHELL_THICKNESS};
use crate::{Error, Result};

/// mu0 / 4pi with mu0 = 4pi * 1e-7 exactly.
pub const MU0_OVER_4PI: f64 = 1e-7;

/// Midpoint quadrature of the Biot-Savart volume integral over the shell:
/// each cell contributes `J x (r - r') / |r - r'|^3` weighted by
/// `cell area * shell thickness * mu0/4pi`; the result is projected on each
/// sensor's outward normal.
///
/// Errors with `SingularKernel` if any sensor comes within
/// [`MIN_SENSOR_DISTANCE`] of a quadrature point.
pub fn biot_savart_normal(
    current: &CurrentField,
    grid: &PatchGrid,
    sensors: &SensorSet,
) -> Result<Vec<f64>> {
    if current.resolution() != grid.resolution() {
        return Err(Error::InvalidDimension("current field does not match grid".into()));
    }
    let mut out = Vec::with_capacity(sensors.len());
    for (pos, normal) in sensors.positions.iter().zip(&sensors.normals) {
        let mut b = [0.0f64; 3];
        for (cell, j) in grid.cells().iter().zip(&current.vectors) {
            let d = [
                pos[0] - cell.position[0],
                pos[1] - cell.position[1],
                pos[2] - cell.position[2],
            ];
            let dist2 = dot(&d, &d);
            if dist2 < MIN_SENSOR_DISTANCE * MIN_SENSOR_DISTANCE {
                return Err(Error::SingularKernel(pos[0], pos[1], pos[2]));
            }
            let w = MU0_OVER_4PI * cell.area * SHELL_THICKNESS / (dist2 * dist2.sqrt());
            let c = cross(j, &d);
            b[0] += w * c[0];
            b[1] += w * c[1];
            b[2] += w * c[2];
        }
        out.push(dot(&b, normal));
    }
    Ok(out)
}
