//! Viscous Bürgers forward solver: Crank–Nicolson diffusion, Adams–Bashforth
//! for the conservative flux `(u^2 / 2)_x`, and an exact per-step relaxation
//! of the error towards the observations.

use crate::equation::{EquationClass, EquationSpec};
use crate::error::{BfnError, Result};
use crate::field::Field;
use crate::gain::Gain;
use crate::trajectory::{Observations, Stepping, Trajectory};

/// Courant limit of the explicit flux treatment.
pub const COURANT_LIMIT: f64 = 0.5;

/// `-(u^2 / 2)_x` at interior nodes, centered, with zero boundary values.
fn flux_term(u: &[f64], h: f64) -> Vec<f64> {
    let n = u.len();
    let mut out = vec![0.0; n];
    for j in 1..n - 1 {
        out[j] = -(u[j + 1] * u[j + 1] - u[j - 1] * u[j - 1]) / (4.0 * h);
    }
    out
}

fn thomas_constant(lower: f64, diag: f64, upper: f64, rhs: &mut [f64]) {
    let m = rhs.len();
    let mut c_prime = vec![0.0; m];
    let mut beta = diag;
    rhs[0] /= beta;
    for j in 1..m {
        c_prime[j - 1] = upper / beta;
        beta = diag - lower * c_prime[j - 1];
        rhs[j] = (rhs[j] - lower * rhs[j - 1]) / beta;
    }
    for j in (0..m - 1).rev() {
        rhs[j] -= c_prime[j] * rhs[j + 1];
    }
}

/// Integrates the unnudged scheme and returns every step (not only recorded ones).
fn evolve_all_steps(
    spec: &EquationSpec,
    gain: &Gain,
    ic: &Field,
    obs_steps: Option<&[Vec<f64>]>,
    nt: usize,
) -> Result<Vec<Vec<f64>>> {
    let grid = spec.grid();
    let n = grid.n();
    let h = grid.spacing();
    let nu = spec.nu();
    let t_final = spec.t_final();
    let stepping = Stepping::new(nt);
    let mask: Vec<bool> = grid.nodes().iter().map(|&x| gain.support().contains(x)).collect();
    let r = nu / (h * h);

    let mut u = ic.values().to_vec();
    let mut steps = Vec::with_capacity(nt + 1);
    steps.push(u.clone());
    let mut prev_flux = flux_term(&u, h);
    for i in 1..=nt {
        let (ta, tb) = (stepping.time(i - 1, t_final), stepping.time(i, t_final));
        let dt = tb - ta;
        let umax = u.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let courant = umax * dt / h;
        if courant > COURANT_LIMIT {
            return Err(BfnError::Stability {
                courant,
                limit: COURANT_LIMIT,
            });
        }
        let flux = flux_term(&u, h);
        let mut rhs: Vec<f64> = (1..n - 1)
            .map(|j| {
                let lap = u[j - 1] - 2.0 * u[j] + u[j + 1];
                u[j] + 0.5 * dt * r * lap + dt * (1.5 * flux[j] - 0.5 * prev_flux[j])
            })
            .collect();
        thomas_constant(-0.5 * dt * r, 1.0 + dt * r, -0.5 * dt * r, &mut rhs);
        prev_flux = flux;
        u[1..n - 1].copy_from_slice(&rhs);
        if let Some(obs) = obs_steps {
            let exposure = gain.temporal_exposure(ta, tb);
            if exposure > 0.0 {
                let decay = (-exposure).exp();
                for j in 1..n - 1 {
                    if mask[j] {
                        u[j] = obs[i][j] + (u[j] - obs[i][j]) * decay;
                    }
                }
            }
        }
        steps.push(u.clone());
    }
    Ok(steps)
}

/// Forward sweep of `u_t - nu u_xx + u u_x = -K (u - u_obs)` on a Dirichlet grid.
/// Observations given as `Free` are produced by this same scheme with `K = 0`.
pub fn solve_viscous_burgers_forward(
    spec: &EquationSpec,
    gain: &Gain,
    ic: &Field,
    uobs: &Observations,
    stepping: Stepping,
) -> Result<Trajectory> {
    if spec.class() != EquationClass::ViscousBurgers {
        return Err(BfnError::InvalidSpec(
            "this solver handles the viscous Bürgers equation only".into(),
        ));
    }
    stepping.validate()?;
    let grid = spec.grid();
    if *ic.grid() != grid {
        return Err(BfnError::InvalidArgument(
            "initial condition must live on the equation's grid".into(),
        ));
    }
    let t_final = spec.t_final();
    let nt = stepping.nt;
    let obs_steps: Vec<Vec<f64>> = match uobs {
        Observations::Zero => vec![vec![0.0; grid.n()]; nt + 1],
        Observations::Free(f0) => evolve_all_steps(spec, &Gain::zero(), f0, None, nt)?,
        Observations::Sampled(tr) => (0..=nt)
            .map(|i| tr.at(stepping.time(i, t_final)).into_values())
            .collect(),
    };
    let steps = evolve_all_steps(spec, gain, ic, Some(&obs_steps), nt)?;
    let snapshots = steps
        .into_iter()
        .enumerate()
        .filter(|(i, _)| stepping.records(*i))
        .map(|(i, v)| Field::new(grid, v, stepping.time(i, t_final)))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(spec.clone(), snapshots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::l2_norm;
    use std::f64::consts::PI;

    #[test]
    fn fixed_point_is_exact() {
        let spec = EquationSpec::viscous_burgers(0.05, 65, 0.5).unwrap();
        let obs0 = Field::from_fn(spec.grid(), 0.0, |x| 0.3 * (PI * x).sin());
        let g = Gain::spatial(2.0, 1.0, 0.2, 0.7).unwrap();
        let tr = solve_viscous_burgers_forward(&spec, &g, &obs0, &Observations::Free(obs0.clone()), Stepping::new(100)).unwrap();
        let free = solve_viscous_burgers_forward(&spec, &Gain::zero(), &obs0, &Observations::Zero, Stepping::new(100)).unwrap();
        for (a, b) in tr.snapshots().iter().zip(free.snapshots()) {
            assert_eq!(a.values(), b.values());
        }
    }

    #[test]
    fn energy_decays_with_zero_observations() {
        let spec = EquationSpec::viscous_burgers(0.01, 129, 1.0).unwrap();
        let ic = Field::from_fn(spec.grid(), 0.0, |x| (PI * x).sin() + 0.5 * (3.0 * PI * x).sin());
        let g = Gain::windowed(1.0, 1.0, 0.2, 0.6).unwrap();
        let tr = solve_viscous_burgers_forward(&spec, &g, &ic, &Observations::Zero, Stepping::new(400)).unwrap();
        let norms: Vec<f64> = tr.snapshots().iter().map(l2_norm).collect();
        assert!(norms.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn courant_guard() {
        let spec = EquationSpec::viscous_burgers(0.01, 129, 1.0).unwrap();
        let ic = Field::from_fn(spec.grid(), 0.0, |x| 10.0 * (PI * x).sin());
        let r = solve_viscous_burgers_forward(&spec, &Gain::zero(), &ic, &Observations::Zero, Stepping::new(10));
        assert!(matches!(r, Err(BfnError::Stability { .. })));
    }
}
