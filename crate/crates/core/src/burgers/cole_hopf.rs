//! Cole–Hopf map between viscous Bürgers on a Dirichlet grid and the heat
//! equation with Neumann ends, plus the `K = 0` forward/backward round trip
//! computed exactly in the cosine basis.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::equation::{EquationClass, EquationSpec};
use crate::error::{BfnError, Result};
use crate::field::{l2_norm, Field};
use crate::grid::BoundaryKind;
use crate::spectral::CosineTransform;
use crate::trajectory::{Stepping, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColeHopfDirection {
    /// `v = exp(-(1 / 2 nu) int_0^x u)`, normalized so `v(0) = 1`.
    ToHeat,
    /// `u = -2 nu v_x / v`.
    FromHeat,
}

/// Fourth-order cumulative integral from x = 0 of node samples.
fn cumulative_integral(u: &[f64], h: f64) -> Vec<f64> {
    let n = u.len();
    let mut out = vec![0.0; n];
    for j in 0..n - 1 {
        let piece = if j == 0 {
            9.0 * u[0] + 19.0 * u[1] - 5.0 * u[2] + u[3]
        } else if j == n - 2 {
            9.0 * u[n - 1] + 19.0 * u[n - 2] - 5.0 * u[n - 3] + u[n - 4]
        } else {
            -u[j - 1] + 13.0 * u[j] + 13.0 * u[j + 1] - u[j + 2]
        };
        out[j + 1] = out[j] + h / 24.0 * piece;
    }
    out
}

/// Fourth-order first derivative at every node (one-sided near the ends).
fn derivative(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    for j in 0..n {
        d[j] = if j >= 2 && j + 2 < n {
            (f[j - 2] - 8.0 * f[j - 1] + 8.0 * f[j + 1] - f[j + 2]) / (12.0 * h)
        } else if j == 0 {
            (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h)
        } else if j == 1 {
            (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h)
        } else if j == n - 2 {
            (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]) / (12.0 * h)
        } else {
            (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] + 3.0 * f[n - 5])
                / (12.0 * h)
        };
    }
    d
}

fn check_positive(v: &Field) -> Result<()> {
    if let Some((index, &value)) = v.values().iter().enumerate().find(|(_, x)| **x <= 0.0) {
        return Err(BfnError::Positivity { index, value });
    }
    Ok(())
}

/// Applies the transform. `ToHeat` takes a Dirichlet field and returns one on
/// the same nodes with Neumann boundary kind; `FromHeat` does the reverse.
pub fn cole_hopf(f: &Field, nu: f64, direction: ColeHopfDirection) -> Result<Field> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(BfnError::InvalidArgument(format!("viscosity must be positive, got {nu}")));
    }
    let grid = *f.grid();
    let h = grid.spacing();
    match direction {
        ColeHopfDirection::ToHeat => {
            if grid.bc() != BoundaryKind::Dirichlet {
                return Err(BfnError::InvalidArgument(
                    "the Bürgers side of the transform is a Dirichlet field".into(),
                ));
            }
            let integral = cumulative_integral(f.values(), h);
            let values = integral.iter().map(|i| (-i / (2.0 * nu)).exp()).collect();
            Field::new(grid.with_bc(BoundaryKind::Neumann), values, f.time())
        }
        ColeHopfDirection::FromHeat => {
            if grid.bc() != BoundaryKind::Neumann {
                return Err(BfnError::InvalidArgument(
                    "the heat side of the transform is a Neumann field".into(),
                ));
            }
            check_positive(f)?;
            let logs: Vec<f64> = f.values().iter().map(|v| v.ln()).collect();
            let mut u: Vec<f64> = derivative(&logs, h).into_iter().map(|d| -2.0 * nu * d).collect();
            let n = u.len();
            u[0] = 0.0;
            u[n - 1] = 0.0;
            Field::new(grid.with_bc(BoundaryKind::Dirichlet), u, f.time())
        }
    }
}

/// `u = -2 nu v_x / v` with the exact derivative of a cosine series.
fn from_heat_spectral(
    transform: &CosineTransform,
    coeffs: &[f64],
    spec: &EquationSpec,
    time: f64,
) -> Result<Field> {
    let v = transform.synthesize(coeffs);
    if let Some((index, &value)) = v.iter().enumerate().find(|(_, x)| **x <= 0.0) {
        return Err(BfnError::Positivity { index, value });
    }
    let dv = transform.derivative_at_nodes(coeffs);
    let nu = spec.nu();
    let values = v.iter().zip(&dv).map(|(v, d)| -2.0 * nu * d / v).collect();
    Field::new(spec.grid(), values, time)
}

fn heat_rates(nu: f64, n_coeffs: usize) -> Vec<f64> {
    (0..n_coeffs).map(|k| nu * (k as f64 * PI).powi(2)).collect()
}

/// Exact `K = 0` viscous Bürgers evolution through the heat equation.
pub fn cole_hopf_reference(spec: &EquationSpec, ic: &Field, stepping: Stepping) -> Result<Trajectory> {
    if spec.class() != EquationClass::ViscousBurgers {
        return Err(BfnError::InvalidSpec(
            "Cole-Hopf evolution needs the viscous Bürgers equation".into(),
        ));
    }
    stepping.validate()?;
    let v0 = cole_hopf(ic, spec.nu(), ColeHopfDirection::ToHeat)?;
    let transform = CosineTransform::new(spec.grid().n());
    let c0 = transform.analyze(v0.values());
    let rates = heat_rates(spec.nu(), c0.len());
    let snapshots = stepping
        .recorded_times(spec.t_final())
        .into_iter()
        .map(|t| {
            let c: Vec<f64> = c0.iter().zip(&rates).map(|(c, r)| c * (-r * t).exp()).collect();
            from_heat_spectral(&transform, &c, spec, t)
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(spec.clone(), snapshots)
}

/// Forward `u` and backward `u~` (from `u~(T) = u(T)`, `K = K' = 0`) through
/// the heat equation on the first `n_modes` cosine modes; returns
/// `max_t ||u~(t) - u(t)|| / ||u(t)||` over the stored times.
pub fn k0_wellposedness_check(
    spec: &EquationSpec,
    ic: &Field,
    n_modes: usize,
    cap: f64,
    stepping: Stepping,
) -> Result<f64> {
    if spec.class() != EquationClass::ViscousBurgers {
        return Err(BfnError::InvalidSpec(
            "the K = 0 round trip needs the viscous Bürgers equation".into(),
        ));
    }
    stepping.validate()?;
    let n = spec.grid().n();
    if n_modes == 0 || n_modes > n {
        return Err(BfnError::InvalidArgument(format!(
            "n_modes must lie in 1..={n}, got {n_modes}"
        )));
    }
    let t_final = spec.t_final();
    let nu = spec.nu();
    let v0 = cole_hopf(ic, nu, ColeHopfDirection::ToHeat)?;
    let transform = CosineTransform::new(n);
    let mut c0 = transform.analyze(v0.values());
    c0[n_modes..].iter_mut().for_each(|c| *c = 0.0);
    let rates = heat_rates(nu, n);
    let c_final: Vec<f64> = c0.iter().zip(&rates).map(|(c, r)| c * (-r * t_final).exp()).collect();

    let refused: Vec<usize> = (0..n_modes).filter(|&k| rates[k] * t_final > cap).collect();
    if nu * (PI * n_modes as f64).powi(2) * t_final > cap {
        let total: f64 = c_final.iter().map(|c| c * c).sum();
        let lost: f64 = refused.iter().map(|&k| c_final[k] * c_final[k]).sum();
        return Err(BfnError::Truncation {
            refused_modes: refused.len().max(1),
            refused_energy_fraction: if total > 0.0 { lost / total } else { 0.0 },
        });
    }

    let mut worst: f64 = 0.0;
    for t in stepping.recorded_times(t_final) {
        let forward: Vec<f64> = c0.iter().zip(&rates).map(|(c, r)| c * (-r * t).exp()).collect();
        let backward: Vec<f64> = c_final
            .iter()
            .zip(&rates)
            // truncated modes stay zero instead of 0 * inf
            .map(|(&c, r)| if c == 0.0 { 0.0 } else { c * (r * (t_final - t)).exp() })
            .collect();
        let u = from_heat_spectral(&transform, &forward, spec, t)?;
        let ut = from_heat_spectral(&transform, &backward, spec, t)?;
        let diff = l2_norm(&ut.sub(&u)?);
        let scale = l2_norm(&u);
        let rel = if scale > 0.0 { diff / scale } else { diff };
        worst = worst.max(rel);
    }
    Ok(worst)
}

/// One `K = K' = 0` BFN step through the heat equation: returns `u(T)`, the
/// recovered `u~(0)` and the number of heat modes refused by `cap`.
pub(crate) fn k0_sweep(spec: &EquationSpec, u0: &Field, cap: f64) -> Result<(Field, Field, usize)> {
    let n = spec.grid().n();
    let t_final = spec.t_final();
    let v0 = cole_hopf(u0, spec.nu(), ColeHopfDirection::ToHeat)?;
    let transform = CosineTransform::new(n);
    let c0 = transform.analyze(v0.values());
    let rates = heat_rates(spec.nu(), n);
    let c_final: Vec<f64> = c0.iter().zip(&rates).map(|(c, r)| c * (-r * t_final).exp()).collect();
    let mut refused = 0;
    let back: Vec<f64> = c_final
        .iter()
        .zip(&rates)
        .map(|(c, r)| {
            if r * t_final > cap {
                refused += 1;
                0.0
            } else {
                c * (r * t_final).exp()
            }
        })
        .collect();
    let u_final = from_heat_spectral(&transform, &c_final, spec, t_final)?;
    let u_back = from_heat_spectral(&transform, &back, spec, 0.0)?;
    Ok((u_final, u_back, refused))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;

    #[test]
    fn zero_velocity_gives_unit_heat() {
        let g = Grid1D::dirichlet(64).unwrap();
        let v = cole_hopf(&Field::zeros(g, 0.0), 0.1, ColeHopfDirection::ToHeat).unwrap();
        assert!(v.values().iter().all(|x| *x == 1.0));
    }

    #[test]
    fn round_trip() {
        let g = Grid1D::dirichlet(512).unwrap();
        let u = Field::from_fn(g, 0.0, |x| 0.2 * (PI * x).sin() - 0.1 * (3.0 * PI * x).sin());
        let v = cole_hopf(&u, 0.05, ColeHopfDirection::ToHeat).unwrap();
        let back = cole_hopf(&v, 0.05, ColeHopfDirection::FromHeat).unwrap();
        for (a, b) in u.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
    }

    #[test]
    fn heat_variable_has_flat_ends() {
        let g = Grid1D::dirichlet(257).unwrap();
        let u = Field::from_fn(g, 0.0, |x| 0.4 * (PI * x).sin());
        let v = cole_hopf(&u, 0.05, ColeHopfDirection::ToHeat).unwrap();
        let d = derivative(v.values(), g.spacing());
        assert!(d[0].abs() < 1e-6 && d[256].abs() < 1e-6, "{} {}", d[0], d[256]);
    }

    #[test]
    fn nonpositive_heat_is_rejected() {
        let g = Grid1D::dirichlet(16).unwrap().with_bc(BoundaryKind::Neumann);
        let mut vals = vec![1.0; 16];
        vals[5] = -0.1;
        let v = Field::new(g, vals, 0.0).unwrap();
        assert!(matches!(
            cole_hopf(&v, 0.1, ColeHopfDirection::FromHeat),
            Err(BfnError::Positivity { index: 5, .. })
        ));
    }
}
