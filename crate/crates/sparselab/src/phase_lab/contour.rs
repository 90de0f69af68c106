//! Level-curve extraction from a sweep grid (marching squares).
//!
//! Grid points carry cell statistics; each quad between four neighboring
//! grid points is classified by which corners sit at or above the level, and
//! crossing points are placed on quad edges by linear interpolation. Chained
//! segments become polylines; disjoint pieces come out as separate curves.

use std::collections::HashMap;

use super::SweepResult;

/// A polyline along which the interpolated mean error equals `level`.
#[derive(Debug, Clone)]
pub struct LevelCurve {
    pub level: f64,
    /// Ordered `(delta, rho)` points.
    pub points: Vec<(f64, f64)>,
}

type Point = (f64, f64);
type Segment = (Point, Point);

fn interp(level: f64, ca: f64, cb: f64, pa: f64, pb: f64) -> f64 {
    // Corner values differ by construction when this edge is crossed.
    pa + (level - ca) / (cb - ca) * (pb - pa)
}

/// Extract all level curves for `level` from a completed sweep. Levels
/// outside the data range give an empty result.
pub fn extract_level_curves(sweep: &SweepResult, level: f64) -> Vec<LevelCurve> {
    let deltas = &sweep.spec.delta_values;
    let rhos = &sweep.spec.rho_values;
    let values = sweep.value_grid();
    extract_from_grid(deltas, rhos, &values, level)
}

/// Marching squares on an explicit grid; `values[di][ri]` sits at
/// `(deltas[di], rhos[ri])`.
pub fn extract_from_grid(
    deltas: &[f64],
    rhos: &[f64],
    values: &[Vec<f64>],
    level: f64,
) -> Vec<LevelCurve> {
    let nd = deltas.len();
    let nr = rhos.len();
    let mut segments: Vec<Segment> = Vec::new();

    for i in 0..nd.saturating_sub(1) {
        for j in 0..nr.saturating_sub(1) {
            let v00 = values[i][j];
            let v10 = values[i + 1][j];
            let v01 = values[i][j + 1];
            let v11 = values[i + 1][j + 1];
            let (d0, d1) = (deltas[i], deltas[i + 1]);
            let (r0, r1) = (rhos[j], rhos[j + 1]);

            let mut case = 0u8;
            if v00 >= level {
                case |= 1;
            }
            if v10 >= level {
                case |= 2;
            }
            if v11 >= level {
                case |= 4;
            }
            if v01 >= level {
                case |= 8;
            }
            if case == 0 || case == 15 {
                continue;
            }

            // Crossing points on the four edges (bottom, right, top, left).
            let bottom = || (interp(level, v00, v10, d0, d1), r0);
            let right = || (d1, interp(level, v10, v11, r0, r1));
            let top = || (interp(level, v01, v11, d0, d1), r1);
            let left = || (d0, interp(level, v00, v01, r0, r1));

            match case {
                1 => segments.push((left(), bottom())),
                2 => segments.push((bottom(), right())),
                3 => segments.push((left(), right())),
                4 => segments.push((right(), top())),
                6 => segments.push((bottom(), top())),
                7 => segments.push((left(), top())),
                8 => segments.push((top(), left())),
                9 => segments.push((top(), bottom())),
                11 => segments.push((top(), right())),
                12 => segments.push((right(), left())),
                13 => segments.push((bottom(), left())),
                14 => segments.push((right(), bottom())),
                5 | 10 => {
                    // Saddle: disambiguate with the cell-center average.
                    let center_above = 0.25 * (v00 + v10 + v01 + v11) >= level;
                    if (case == 5) == center_above {
                        segments.push((left(), bottom()));
                        segments.push((right(), top()));
                    } else {
                        segments.push((left(), top()));
                        segments.push((right(), bottom()));
                    }
                }
                _ => unreachable!(),
            }
        }
    }

    chain_segments(segments, level)
}

fn key(p: Point) -> (u64, u64) {
    (p.0.to_bits(), p.1.to_bits())
}

/// Join segments that share endpoints (crossings on shared edges are
/// computed identically in both neighboring quads, so endpoint matching is
/// exact) into polylines.
fn chain_segments(segments: Vec<Segment>, level: f64) -> Vec<LevelCurve> {
    let mut used = vec![false; segments.len()];
    let mut by_endpoint: HashMap<(u64, u64), Vec<usize>> = HashMap::new();
    for (i, (a, b)) in segments.iter().enumerate() {
        by_endpoint.entry(key(*a)).or_default().push(i);
        by_endpoint.entry(key(*b)).or_default().push(i);
    }

    let mut curves = Vec::new();
    for start in 0..segments.len() {
        if used[start] {
            continue;
        }
        used[start] = true;
        let (a, b) = segments[start];
        let mut points = vec![a, b];

        // Grow in both directions.
        for forward in [true, false] {
            loop {
                let tip = if forward { *points.last().unwrap() } else { points[0] };
                let Some(cands) = by_endpoint.get(&key(tip)) else { break };
                let Some(&next) = cands.iter().find(|&&i| !used[i]) else { break };
                used[next] = true;
                let (na, nb) = segments[next];
                let continuation = if key(na) == key(tip) { nb } else { na };
                if forward {
                    points.push(continuation);
                } else {
                    points.insert(0, continuation);
                }
            }
        }
        curves.push(LevelCurve { level, points });
    }
    curves
}

/// All rho values where any of `curves` crosses the vertical line at
/// `delta`, found by linear interpolation along each polyline.
pub fn rho_crossings_at_delta(curves: &[LevelCurve], delta: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for curve in curves {
        for w in curve.points.windows(2) {
            let (d0, r0) = w[0];
            let (d1, r1) = w[1];
            if (d0 - delta) * (d1 - delta) <= 0.0 && d0 != d1 {
                let t = (delta - d0) / (d1 - d0);
                if (0.0..=1.0).contains(&t) {
                    out.push(r0 + t * (r1 - r0));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bilinear(deltas: &[f64], rhos: &[f64], values: &[Vec<f64>], p: (f64, f64)) -> f64 {
        // Locate the quad containing p and interpolate.
        let (d, r) = p;
        let i = deltas.windows(2).position(|w| d >= w[0] - 1e-15 && d <= w[1] + 1e-15).unwrap();
        let j = rhos.windows(2).position(|w| r >= w[0] - 1e-15 && r <= w[1] + 1e-15).unwrap();
        let tx = (d - deltas[i]) / (deltas[i + 1] - deltas[i]);
        let ty = (r - rhos[j]) / (rhos[j + 1] - rhos[j]);
        values[i][j] * (1.0 - tx) * (1.0 - ty)
            + values[i + 1][j] * tx * (1.0 - ty)
            + values[i][j + 1] * (1.0 - tx) * ty
            + values[i + 1][j + 1] * tx * ty
    }

    #[test]
    fn constant_grid_has_no_contour() {
        let deltas = vec![0.0, 1.0];
        let rhos = vec![0.0, 1.0];
        let values = vec![vec![0.3, 0.3], vec![0.3, 0.3]];
        assert!(extract_from_grid(&deltas, &rhos, &values, 0.5).is_empty());
    }

    #[test]
    fn simple_gradient_gives_vertical_midline() {
        // Values 0 on the left column, 1 on the right: the 0.5 contour is the
        // vertical segment at delta midpoint.
        let deltas = vec![0.0, 1.0];
        let rhos = vec![0.0, 1.0];
        let values = vec![vec![0.0, 0.0], vec![1.0, 1.0]];
        let curves = extract_from_grid(&deltas, &rhos, &values, 0.5);
        assert_eq!(curves.len(), 1);
        for (d, _) in &curves[0].points {
            assert!((d - 0.5).abs() <= 1e-15);
        }
        let rs: Vec<f64> = curves[0].points.iter().map(|p| p.1).collect();
        assert!(rs.contains(&0.0) && rs.contains(&1.0));
    }

    #[test]
    fn contour_points_sit_on_the_level() {
        // Smooth synthetic surface; every polyline vertex must interpolate
        // back to the level.
        let deltas: Vec<f64> = (0..9).map(|i| 0.1 + 0.1 * i as f64).collect();
        let rhos: Vec<f64> = (0..7).map(|i| 0.1 + 0.1 * i as f64).collect();
        let values: Vec<Vec<f64>> = deltas
            .iter()
            .map(|d| rhos.iter().map(|r| (3.0 * d - 1.2 * r).tanh() * 0.5 + 0.5).collect())
            .collect();
        let level = 0.55;
        let curves = extract_from_grid(&deltas, &rhos, &values, level);
        assert!(!curves.is_empty());
        for curve in &curves {
            for &p in &curve.points {
                let v = bilinear(&deltas, &rhos, &values, p);
                assert!((v - level).abs() <= 1e-9, "point {p:?} interpolates to {v}");
            }
        }
    }

    #[test]
    fn crossings_are_found() {
        let curve = LevelCurve { level: 0.5, points: vec![(0.2, 0.1), (0.4, 0.3), (0.6, 0.2)] };
        let rs = rho_crossings_at_delta(&[curve], 0.3);
        assert_eq!(rs.len(), 1);
        assert!((rs[0] - 0.2).abs() <= 1e-12);
    }
}
