//! Separable 2-D biorthogonal 4-2 wavelet transform via lifting.
//!
//! One level on a length-`2L` signal: split into evens `s` and odds `d`,
//! predict the odds by 4-tap cubic interpolation,
//!
//! ```text
//! d[i] -= 9/16 (s[i] + s[i+1]) - 1/16 (s[i-1] + s[i+2]),
//! ```
//!
//! update the evens to preserve the running mean,
//!
//! ```text
//! s[i] += 1/4 (d[i-1] + d[i]),
//! ```
//!
//! then rescale `s *= sqrt 2`, `d /= sqrt 2`. Boundaries use symmetric
//! (reflective) extension. The analysis high-pass annihilates cubics in the
//! interior and constants everywhere; the inverse runs the same steps
//! backwards, so reconstruction is exact to rounding regardless of boundary
//! handling.
//!
//! The 2-D transform applies the level to rows then columns of the current
//! low-pass block and recurses to full depth `log2(size)`; coefficients stay
//! in the standard in-place pyramid layout.

use crate::{Error, Result};

const PREDICT_NEAR: f64 = 9.0 / 16.0;
const PREDICT_FAR: f64 = 1.0 / 16.0;
const UPDATE: f64 = 0.25;

fn reflect(mut i: isize, len: isize) -> usize {
    loop {
        if i < 0 {
            i = -1 - i;
        } else if i >= len {
            i = 2 * len - 1 - i;
        } else {
            return i as usize;
        }
    }
}

fn lift_forward(buf: &mut [f64], scratch: &mut [f64]) {
    let len = buf.len();
    let half = len / 2;
    let (s, d) = scratch.split_at_mut(half);
    for i in 0..half {
        s[i] = buf[2 * i];
        d[i] = buf[2 * i + 1];
    }
    let hl = half as isize;
    for i in 0..half {
        let ii = i as isize;
        let pred = PREDICT_NEAR * (s[reflect(ii, hl)] + s[reflect(ii + 1, hl)])
            - PREDICT_FAR * (s[reflect(ii - 1, hl)] + s[reflect(ii + 2, hl)]);
        d[i] -= pred;
    }
    for i in 0..half {
        let ii = i as isize;
        s[i] += UPDATE * (d[reflect(ii - 1, hl)] + d[reflect(ii, hl)]);
    }
    let root2 = std::f64::consts::SQRT_2;
    for i in 0..half {
        buf[i] = s[i] * root2;
        buf[half + i] = d[i] / root2;
    }
}

fn lift_inverse(buf: &mut [f64], scratch: &mut [f64]) {
    let len = buf.len();
    let half = len / 2;
    let (s, d) = scratch.split_at_mut(half);
    let root2 = std::f64::consts::SQRT_2;
    for i in 0..half {
        s[i] = buf[i] / root2;
        d[i] = buf[half + i] * root2;
    }
    let hl = half as isize;
    for i in 0..half {
        let ii = i as isize;
        s[i] -= UPDATE * (d[reflect(ii - 1, hl)] + d[reflect(ii, hl)]);
    }
    for i in 0..half {
        let ii = i as isize;
        let pred = PREDICT_NEAR * (s[reflect(ii, hl)] + s[reflect(ii + 1, hl)])
            - PREDICT_FAR * (s[reflect(ii - 1, hl)] + s[reflect(ii + 2, hl)]);
        d[i] += pred;
    }
    for i in 0..half {
        buf[2 * i] = s[i];
        buf[2 * i + 1] = d[i];
    }
}

fn check_size(values: &[f64], size: usize) -> Result<()> {
    if size < 2 || !size.is_power_of_two() {
        return Err(Error::UnsupportedSize(size));
    }
    if values.len() != size * size {
        return Err(Error::InvalidDimension(format!(
            "expected {} values for a {size}x{size} field, got {}",
            size * size,
            values.len()
        )));
    }
    Ok(())
}

/// In-place 2-D analysis to full depth. `values` is row-major
/// (`i * size + j`).
pub fn cdf42_forward_2d(values: &mut [f64], size: usize) -> Result<()> {
    check_size(values, size)?;
    let mut buf = vec![0.0f64; size];
    let mut scratch = vec![0.0f64; size];
    let mut sz = size;
    while sz >= 2 {
        for i in 0..sz {
            buf[..sz].copy_from_slice(&values[i * size..i * size + sz]);
            lift_forward(&mut buf[..sz], &mut scratch[..sz]);
            values[i * size..i * size + sz].copy_from_slice(&buf[..sz]);
        }
        for j in 0..sz {
            for i in 0..sz {
                buf[i] = values[i * size + j];
            }
            lift_forward(&mut buf[..sz], &mut scratch[..sz]);
            for i in 0..sz {
                values[i * size + j] = buf[i];
            }
        }
        sz /= 2;
    }
    Ok(())
}

/// In-place 2-D synthesis; exact inverse of [`cdf42_forward_2d`].
pub fn cdf42_inverse_2d(values: &mut [f64], size: usize) -> Result<()> {
    check_size(values, size)?;
    let mut buf = vec![0.0f64; size];
    let mut scratch = vec![0.0f64; size];
    let mut sz = 2;
    while sz <= size {
        for j in 0..sz {
            for i in 0..sz {
                buf[i] = values[i * size + j];
            }
            lift_inverse(&mut buf[..sz], &mut scratch[..sz]);
            for i in 0..sz {
                values[i * size + j] = buf[i];
            }
        }
        for i in 0..sz {
            buf[..sz].copy_from_slice(&values[i * size..i * size + sz]);
            lift_inverse(&mut buf[..sz], &mut scratch[..sz]);
            values[i * size..i * size + sz].copy_from_slice(&buf[..sz]);
        }
        sz *= 2;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn round_trip_is_exact() {
        for size in [2usize, 4, 16, 64] {
            let mut rng = crate::rng::stream(10 + size as u64);
            let original: Vec<f64> = (0..size * size).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut work = original.clone();
            cdf42_forward_2d(&mut work, size).unwrap();
            cdf42_inverse_2d(&mut work, size).unwrap();
            let max_dev = work
                .iter()
                .zip(&original)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0f64, f64::max);
            assert!(max_dev <= 1e-10, "size {size}: round-trip error {max_dev:.3e}");
        }
    }

    #[test]
    fn constant_field_has_zero_details() {
        let size = 32;
        let mut work = vec![2.5f64; size * size];
        cdf42_forward_2d(&mut work, size).unwrap();
        // Only the single top-level approximation coefficient survives.
        for (idx, v) in work.iter().enumerate() {
            if idx == 0 {
                assert!(v.abs() > 1.0);
            } else {
                assert!(v.abs() <= 1e-12, "detail {idx} = {v}");
            }
        }
    }

    #[test]
    fn sparse_synthetic_model_round_trips() {
        let size = 64;
        let mut coeffs = vec![0.0f64; size * size];
        let mut rng = crate::rng::stream(99);
        for _ in 0..60 {
            let idx = rng.gen_range(0..size * size);
            coeffs[idx] = rng.gen_range(-1.0..1.0f64);
        }
        let frozen = coeffs.clone();
        cdf42_inverse_2d(&mut coeffs, size).unwrap();
        cdf42_forward_2d(&mut coeffs, size).unwrap();
        let max_dev = coeffs
            .iter()
            .zip(&frozen)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(max_dev <= 1e-10, "model round-trip error {max_dev:.3e}");
    }

    #[test]
    fn rejects_bad_sizes() {
        let mut v = vec![0.0; 9];
        assert!(cdf42_forward_2d(&mut v, 3).is_err());
        let mut v = vec![0.0; 8];
        assert!(cdf42_forward_2d(&mut v, 4).is_err());
        let mut v = vec![0.0; 1];
        assert!(cdf42_inverse_2d(&mut v, 1).is_err());
    }
}
