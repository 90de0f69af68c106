//! Cubed-sphere patch geometry and sensor placement.
//!
//! The current-carrying domain is a thin spherical shell patch parametrized
//! by angular coordinates `(xi, eta)` whose coordinate lines are angularly
//! equidistant great circles:
//!
//! ```text
//! x = (r/s) tan(xi),  y = (r/s) tan(eta),  z = r/s,
//! s = sqrt(1 + tan^2(xi) + tan^2(eta)).
//! ```
//!
//! The shell spans `0.089 <= r <= 0.090` (SI meters) with
//! `-pi/3 <= xi, eta <= pi/3`; all volume quadrature collapses onto the mid
//! surface `r = 0.0895` with the 0.001 m thickness as a factor.

use rand::Rng;

use crate::rng::stream;
use crate::{Error, Result};

pub const XI_MAX: f64 = std::f64::consts::FRAC_PI_3;
pub const R_INNER: f64 = 0.089;
pub const R_OUTER: f64 = 0.090;
pub const R_MID: f64 = 0.0895;
pub const SHELL_THICKNESS: f64 = 0.001;

/// Sensors closer than this to any quadrature point are rejected.
pub const MIN_SENSOR_DISTANCE: f64 = 0.005;

pub type Vec3 = [f64; 3];

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

/// Map patch coordinates to Cartesian space at radius `r`.
pub fn cubed_sphere_map(xi: f64, eta: f64, r: f64) -> Vec3 {
    let u = xi.tan();
    let v = eta.tan();
    let s = (1.0 + u * u + v * v).sqrt();
    [r * u / s, r * v / s, r / s]
}

/// Per-cell geometric data evaluated at the cell center on the mid surface.
#[derive(Debug, Clone)]
pub struct CellGeometry {
    pub xi: f64,
    pub eta: f64,
    pub position: Vec3,
    /// Tangent vector d(position)/d(xi).
    pub x_xi: Vec3,
    /// Tangent vector d(position)/d(eta).
    pub x_eta: Vec3,
    /// Metric determinant square root, `|x_xi cross x_eta|`.
    pub sqrt_g: f64,
    /// Surface area of the cell, `sqrt_g * h^2`.
    pub area: f64,
    /// Outward unit normal (radial direction).
    pub normal: Vec3,
    /// Metric coefficients (E, F, G) = (x_xi.x_xi, x_xi.x_eta, x_eta.x_eta).
    pub metric: (f64, f64, f64),
}

/// A `resolution x resolution` grid of cells covering the patch. Cells are
/// stored row-major with index `i * resolution + j`, where `i` runs over xi
/// and `j` over eta.
#[derive(Debug, Clone)]
pub struct PatchGrid {
    resolution: usize,
    h: f64,
    cells: Vec<CellGeometry>,
}

impl PatchGrid {
    pub fn new(resolution: usize) -> Result<Self> {
        if resolution < 2 {
            return Err(Error::InvalidDimension(format!(
                "patch resolution must be >= 2, got {resolution}"
            )));
        }
        let h = 2.0 * XI_MAX / resolution as f64;
        let mut cells = Vec::with_capacity(resolution * resolution);
        for i in 0..resolution {
            let xi = -XI_MAX + (i as f64 + 0.5) * h;
            for j in 0..resolution {
                let eta = -XI_MAX + (j as f64 + 0.5) * h;
                cells.push(Self::cell_geometry(xi, eta, h));
            }
        }
        Ok(Self { resolution, h, cells })
    }

    fn cell_geometry(xi: f64, eta: f64, h: f64) -> CellGeometry {
        let r = R_MID;
        let u = xi.tan();
        let v = eta.tan();
        let du = 1.0 + u * u;
        let dv = 1.0 + v * v;
        let s2 = 1.0 + u * u + v * v;
        let s = s2.sqrt();
        let s3 = s2 * s;

        let position = [r * u / s, r * v / s, r / s];
        let cu = r * du / s3;
        let cv = r * dv / s3;
        let x_xi = [cu * (1.0 + v * v), -cu * u * v, -cu * u];
        let x_eta = [-cv * u * v, cv * (1.0 + u * u), -cv * v];
        let normal_raw = cross(&x_xi, &x_eta);
        let sqrt_g = norm(&normal_raw);
        let normal = [position[0] / r, position[1] / r, position[2] / r];
        let metric = (dot(&x_xi, &x_xi), dot(&x_xi, &x_eta), dot(&x_eta, &x_eta));
        CellGeometry { xi, eta, position, x_xi, x_eta, sqrt_g, area: sqrt_g * h * h, normal, metric }
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    /// Angular grid spacing.
    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn cells(&self) -> &[CellGeometry] {
        &self.cells
    }

    pub fn cell(&self, i: usize, j: usize) -> &CellGeometry {
        &self.cells[i * self.resolution + j]
    }

    /// Solid angle subtended by the patch, from the cell-area quadrature.
    pub fn solid_angle(&self) -> f64 {
        self.cells.iter().map(|c| c.area).sum::<f64>() / (R_MID * R_MID)
    }
}

/// Measurement points above the patch with their outward unit normals.
#[derive(Debug, Clone)]
pub struct SensorSet {
    pub positions: Vec<Vec3>,
    pub normals: Vec<Vec3>,
    /// Patch coordinates each sensor was placed at.
    pub patch_coords: Vec<(f64, f64)>,
    pub radius: f64,
}

impl SensorSet {
    /// Draw `count` sensors uniformly in `(xi, eta)` over the patch at the
    /// given radius.
    pub fn sample(count: usize, radius: f64, seed: u64) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidConfig("need at least one sensor".into()));
        }
        if radius <= R_OUTER {
            return Err(Error::InvalidConfig(format!(
                "sensor radius {radius} must lie outside the shell (> {R_OUTER})"
            )));
        }
        let mut rng = stream(seed);
        let mut positions = Vec::with_capacity(count);
        let mut normals = Vec::with_capacity(count);
        let mut patch_coords = Vec::with_capacity(count);
        for _ in 0..count {
            let xi = rng.gen_range(-XI_MAX..XI_MAX);
            let eta = rng.gen_range(-XI_MAX..XI_MAX);
            let p = cubed_sphere_map(xi, eta, radius);
            let n = [p[0] / radius, p[1] / radius, p[2] / radius];
            positions.push(p);
            normals.push(n);
            patch_coords.push((xi, eta));
        }
        Ok(Self { positions, normals, patch_coords, radius })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_center_and_diagonal() {
        let r = 0.0895;
        let p = cubed_sphere_map(0.0, 0.0, r);
        assert_eq!(p, [0.0, 0.0, r]);
        // xi = pi/4: s = sqrt(2), point (r/sqrt 2, 0, r/sqrt 2).
        let p = cubed_sphere_map(std::f64::consts::FRAC_PI_4, 0.0, r);
        assert!((p[0] - r / 2.0f64.sqrt()).abs() <= 1e-15);
        assert!(p[1].abs() <= 1e-15);
        assert!((p[2] - r / 2.0f64.sqrt()).abs() <= 1e-15);
    }

    #[test]
    fn mapped_points_sit_on_the_sphere() {
        for &(xi, eta) in &[(0.3, -0.8), (1.0, 1.0), (-0.6, 0.2), (0.0, 1.04)] {
            let p = cubed_sphere_map(xi, eta, 0.1);
            assert!((norm(&p) - 0.1).abs() <= 1e-12 * 0.1);
        }
    }

    #[test]
    fn tangent_vectors_match_finite_differences() {
        let (xi, eta) = (0.4, -0.7);
        let g = PatchGrid::cell_geometry(xi, eta, 0.01);
        let d = 1e-6;
        for axis in 0..2 {
            let (pa, pb) = if axis == 0 {
                (cubed_sphere_map(xi + d, eta, R_MID), cubed_sphere_map(xi - d, eta, R_MID))
            } else {
                (cubed_sphere_map(xi, eta + d, R_MID), cubed_sphere_map(xi, eta - d, R_MID))
            };
            let fd = [(pa[0] - pb[0]) / (2.0 * d), (pa[1] - pb[1]) / (2.0 * d), (pa[2] - pb[2]) / (2.0 * d)];
            let analytic = if axis == 0 { g.x_xi } else { g.x_eta };
            for c in 0..3 {
                assert!(
                    (fd[c] - analytic[c]).abs() <= 1e-7 * (1.0 + analytic[c].abs()),
                    "axis {axis} component {c}: fd {} vs {}",
                    fd[c],
                    analytic[c]
                );
            }
        }
    }

    #[test]
    fn grid_cells_are_on_mid_surface_and_inside_range() {
        let grid = PatchGrid::new(16).unwrap();
        for c in grid.cells() {
            assert!((norm(&c.position) - R_MID).abs() <= 1e-12 * R_MID);
            assert!(c.xi.abs() < XI_MAX && c.eta.abs() < XI_MAX);
            assert!(c.sqrt_g > 0.0 && c.area > 0.0);
        }
    }

    #[test]
    fn patch_covers_just_over_a_quarter_of_the_sphere() {
        let grid = PatchGrid::new(64).unwrap();
        let fraction = grid.solid_angle() / (4.0 * std::f64::consts::PI);
        assert!(
            fraction > 0.25 && fraction < 0.30,
            "patch covers fraction {fraction}"
        );
    }

    #[test]
    fn sensors_sit_at_radius_inside_patch() {
        let sensors = SensorSet::sample(200, 0.1, 5).unwrap();
        for (p, (xi, eta)) in sensors.positions.iter().zip(&sensors.patch_coords) {
            assert!((norm(p) - 0.1).abs() <= 1e-12 * 0.1);
            assert!(xi.abs() <= XI_MAX && eta.abs() <= XI_MAX);
        }
        assert!(SensorSet::sample(10, 0.05, 1).is_err());
    }
}
