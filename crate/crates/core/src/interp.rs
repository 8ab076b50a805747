//! Interpolation helpers: periodic linear lookups and the monotone cubic
//! (PCHIP) resampling that maps values carried on characteristic feet back
//! onto grid nodes.

use crate::error::{BfnError, Result};

/// Linear interpolation of 1-periodic node samples `v_j = f(j / n)`.
pub fn lerp_periodic(values: &[f64], x: f64) -> f64 {
    let n = values.len();
    let s = x.rem_euclid(1.0) * n as f64;
    let i = (s.floor() as usize).min(n - 1);
    let frac = s - i as f64;
    let a = values[i];
    let b = values[(i + 1) % n];
    a + frac * (b - a)
}

/// Linear interpolation of samples at `x_j = j / (n - 1)` on [0, 1],
/// clamped at the ends.
pub fn lerp_interval(values: &[f64], x: f64) -> f64 {
    let n = values.len();
    let s = x.clamp(0.0, 1.0) * (n - 1) as f64;
    let i = (s.floor() as usize).min(n - 2);
    let frac = s - i as f64;
    values[i] + frac * (values[i + 1] - values[i])
}

/// Fritsch–Butland slopes for a monotone cubic Hermite interpolant.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let m = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..m - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
    let mut d = vec![0.0; m];
    for k in 1..m - 1 {
        let (a, b) = (delta[k - 1], delta[k]);
        if a * b > 0.0 {
            let w1 = 2.0 * h[k] + h[k - 1];
            let w2 = h[k] + 2.0 * h[k - 1];
            d[k] = (w1 + w2) / (w1 / a + w2 / b);
        }
    }
    d[0] = delta[0];
    d[m - 1] = delta[m - 2];
    d
}

fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> f64 {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * y0
        + (t3 - 2.0 * t2 + t) * h * d0
        + (-2.0 * t3 + 3.0 * t2) * y1
        + (t3 - t2) * h * d1
}

/// Checks that lifted positions are strictly increasing and span less than
/// one period, i.e. the curves they sample have not crossed. Returns the index
/// of the first offending foot.
pub fn first_crossing(positions: &[f64], tol: f64) -> Option<usize> {
    let n = positions.len();
    for j in 0..n - 1 {
        if positions[j + 1] - positions[j] <= tol {
            return Some(j);
        }
    }
    if positions[0] + 1.0 - positions[n - 1] <= tol {
        return Some(n - 1);
    }
    None
}

/// Resamples values carried at lifted, strictly increasing positions
/// (one per foot, spanning less than one period) onto the nodes `j / n_out`
/// of a periodic grid, with monotone cubic interpolation.
pub fn resample_periodic(positions: &[f64], values: &[f64], n_out: usize) -> Result<Vec<f64>> {
    let targets: Vec<f64> = (0..n_out).map(|i| i as f64 / n_out as f64).collect();
    interpolate_periodic(positions, values, &targets)
}

/// Monotone cubic interpolation of periodic data carried at lifted, strictly
/// increasing positions, evaluated at arbitrary points (taken modulo one).
pub fn interpolate_periodic(positions: &[f64], values: &[f64], targets: &[f64]) -> Result<Vec<f64>> {
    let n = positions.len();
    if n < 3 || values.len() != n {
        return Err(BfnError::InvalidArgument(
            "resampling needs at least 3 matching positions and values".into(),
        ));
    }
    if first_crossing(positions, 0.0).is_some() {
        return Err(BfnError::InvalidArgument(
            "positions are not strictly increasing within one period".into(),
        ));
    }
    const PAD: usize = 2;
    let mut xs = Vec::with_capacity(n + 2 * PAD);
    let mut ys = Vec::with_capacity(n + 2 * PAD);
    for j in n - PAD..n {
        xs.push(positions[j] - 1.0);
        ys.push(values[j]);
    }
    xs.extend_from_slice(positions);
    ys.extend_from_slice(values);
    for j in 0..PAD {
        xs.push(positions[j] + 1.0);
        ys.push(values[j]);
    }
    let d = pchip_slopes(&xs, &ys);
    let base = positions[0];
    let out = targets
        .iter()
        .map(|&y| {
            let target = base + (y - base).rem_euclid(1.0);
            // largest k with xs[k] <= target, inside [PAD, PAD + n]
            let k = xs.partition_point(|&p| p <= target).saturating_sub(1);
            let k = k.clamp(PAD, PAD + n - 1);
            if xs[k] == target {
                ys[k]
            } else {
                hermite(xs[k], xs[k + 1], ys[k], ys[k + 1], d[k], d[k + 1], target)
            }
        })
        .collect();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn periodic_lerp_wraps() {
        let v = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(lerp_periodic(&v, 0.125), 0.5);
        assert_eq!(lerp_periodic(&v, 0.875), 1.5);
        assert_eq!(lerp_periodic(&v, 1.25), 1.0);
    }

    #[test]
    fn resampling_is_identity_on_nodes() {
        let n = 64;
        let pos: Vec<f64> = (0..n).map(|j| j as f64 / n as f64 + 3.0).collect();
        let vals: Vec<f64> = (0..n).map(|j| (j as f64).sin()).collect();
        let out = resample_periodic(&pos, &vals, n).unwrap();
        assert_eq!(out, vals);
    }

    #[test]
    fn resampling_shifted_sine() {
        let n = 256;
        let shift = 0.3137;
        let pos: Vec<f64> = (0..n).map(|j| j as f64 / n as f64 + shift).collect();
        let vals: Vec<f64> = (0..n).map(|j| (2.0 * PI * j as f64 / n as f64).sin()).collect();
        let out = resample_periodic(&pos, &vals, n).unwrap();
        for (i, v) in out.iter().enumerate() {
            let want = (2.0 * PI * (i as f64 / n as f64 - shift)).sin();
            assert!((v - want).abs() < 1e-4, "{i}: {v} vs {want}");
        }
    }

    #[test]
    fn detects_crossing() {
        assert_eq!(first_crossing(&[0.0, 0.5, 0.4], 0.0), Some(1));
        assert_eq!(first_crossing(&[0.0, 0.5, 1.0], 0.0), Some(2));
        assert_eq!(first_crossing(&[0.0, 0.3, 0.6], 0.0), None);
        assert!(resample_periodic(&[0.0, 0.5, 0.4], &[1.0, 2.0, 3.0], 4).is_err());
    }
}
