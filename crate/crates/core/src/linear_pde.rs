//! Viscous linear transport with nudging on [0, 1], Dirichlet:
//!
//! `du/dt - nu u_xx + c u_x = -/+ K(t, x) (u - u_obs)`.
//!
//! Everything is solved for the error `w = u - u_obs`, which obeys the same
//! equation with zero observations; `u` is rebuilt by adding the observation
//! trajectory back. With `c = 0` the sine modes diagonalize diffusion and the
//! evolution is exact in time: per-mode exponentials for spatially uniform
//! gains, a dense matrix exponential in sine space for interval supports.
//! With `c != 0`, Crank–Nicolson on the nodes.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::equation::{Advection, EquationClass, EquationSpec};
use crate::error::{BfnError, Result};
use crate::field::Field;
use crate::gain::{Gain, Window};
use crate::grid::Grid1D;
use crate::spectral::SineTransform;
use crate::trajectory::{Observations, Stepping, Trajectory};

/// Sign of the feedback term.
///
/// `Damping` is the forward system (`-K (u - u_obs)`); `AntiDamping` is the
/// backward system run forward in time from its initial value
/// (`+K' (u - u_obs)`, `K' = kappa K`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Nudging {
    Damping,
    AntiDamping,
}

impl Nudging {
    /// Multiplier of `K` in the error equation `dw/dt = ... + sigma K w`.
    pub fn sigma(&self, gain: &Gain) -> f64 {
        match self {
            Nudging::Damping => -1.0,
            Nudging::AntiDamping => gain.kappa(),
        }
    }
}

/// Default refusal threshold on the backward amplification exponent
/// `nu (k pi)^2 T`. Rounding noise of a final field's coefficients is
/// amplified by up to `e^16 ~ 8.9e6`, which keeps it near 1e-9 relative.
pub const DEFAULT_AMPLIFICATION_CAP: f64 = 16.0;

fn advection_speed(spec: &EquationSpec) -> Result<f64> {
    if spec.class() != EquationClass::ViscousLinear {
        return Err(BfnError::UnsupportedRegime {
            anchor: "linear solver".into(),
            reason: format!(
                "{:?} is not the viscous linear equation; inviscid equations go through characteristics",
                spec.class()
            ),
        });
    }
    match spec.advection() {
        Advection::Constant(c) => Ok(*c),
        _ => Err(BfnError::UnsupportedRegime {
            anchor: "linear solver".into(),
            reason: "viscous transport with a variable profile a(x) is not supported".into(),
        }),
    }
}

fn check_field(spec: &EquationSpec, f: &Field, what: &str) -> Result<()> {
    if *f.grid() != spec.grid() {
        return Err(BfnError::InvalidArgument(format!(
            "{what} does not live on the equation's grid"
        )));
    }
    Ok(())
}

/// Diffusion decay rates `nu (k pi)^2`, k = 1..n-2.
pub fn sine_rates(spec: &EquationSpec) -> Vec<f64> {
    let m = spec.grid().n() - 2;
    (1..=m)
        .map(|k| spec.nu() * (k as f64 * PI).powi(2))
        .collect()
}

/// Integrator selected for a viscous linear problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearIntegrator {
    ModalDiagonal,
    ModalDense,
    CrankNicolson,
}

pub fn select_integrator(spec: &EquationSpec, gain: &Gain) -> Result<LinearIntegrator> {
    let c = advection_speed(spec)?;
    Ok(if c != 0.0 {
        LinearIntegrator::CrankNicolson
    } else if gain.is_spatially_uniform() {
        LinearIntegrator::ModalDiagonal
    } else {
        LinearIntegrator::ModalDense
    })
}

/// Forward integration of the nudged viscous linear equation from `ic`.
pub fn solve_forward_linear(
    spec: &EquationSpec,
    gain: &Gain,
    sign: Nudging,
    ic: &Field,
    uobs: &Observations,
    stepping: Stepping,
) -> Result<Trajectory> {
    let integrator = select_integrator(spec, gain)?;
    solve_with(spec, gain, sign, ic, uobs, stepping, integrator)
}

/// Same as [`solve_forward_linear`] but always on the Crank–Nicolson path.
pub fn solve_forward_linear_cn(
    spec: &EquationSpec,
    gain: &Gain,
    sign: Nudging,
    ic: &Field,
    uobs: &Observations,
    stepping: Stepping,
) -> Result<Trajectory> {
    advection_speed(spec)?;
    solve_with(spec, gain, sign, ic, uobs, stepping, LinearIntegrator::CrankNicolson)
}

fn solve_with(
    spec: &EquationSpec,
    gain: &Gain,
    sign: Nudging,
    ic: &Field,
    uobs: &Observations,
    stepping: Stepping,
    integrator: LinearIntegrator,
) -> Result<Trajectory> {
    stepping.validate()?;
    check_field(spec, ic, "initial condition")?;
    let grid = spec.grid();
    let obs0 = uobs.initial(grid);
    check_field(spec, &obs0, "observation")?;
    let w0 = ic.sub(&obs0)?;
    let errors = evolve_error(spec, gain, sign, &w0, stepping, integrator)?;
    let obs = observation_snapshots(spec, uobs, stepping, integrator)?;
    let snapshots = errors
        .into_iter()
        .zip(obs)
        .map(|(w, o)| w.add(&o))
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(spec.clone(), snapshots)
}

fn observation_snapshots(
    spec: &EquationSpec,
    uobs: &Observations,
    stepping: Stepping,
    integrator: LinearIntegrator,
) -> Result<Vec<Field>> {
    let grid = spec.grid();
    let times = stepping.recorded_times(spec.t_final());
    match uobs {
        Observations::Zero => Ok(times.iter().map(|&t| Field::zeros(grid, t)).collect()),
        Observations::Free(f0) => {
            let integrator = match integrator {
                LinearIntegrator::ModalDense => LinearIntegrator::ModalDiagonal,
                other => other,
            };
            evolve_error(spec, &Gain::zero(), Nudging::Damping, f0, stepping, integrator)
        }
        Observations::Sampled(tr) => Ok(times.iter().map(|&t| tr.at(t)).collect()),
    }
}

/// Evolves the error equation `dw/dt = nu w_xx - c w_x + sigma K w`.
fn evolve_error(
    spec: &EquationSpec,
    gain: &Gain,
    sign: Nudging,
    w0: &Field,
    stepping: Stepping,
    integrator: LinearIntegrator,
) -> Result<Vec<Field>> {
    match integrator {
        LinearIntegrator::ModalDiagonal => Ok(evolve_modal_diagonal(spec, gain, sign, w0, stepping)),
        LinearIntegrator::ModalDense => Ok(evolve_modal_dense(spec, gain, sign, w0, stepping)),
        LinearIntegrator::CrankNicolson => evolve_crank_nicolson(spec, gain, sign, w0, stepping),
    }
}

pub(crate) fn interior(f: &Field) -> &[f64] {
    let v = f.values();
    &v[1..v.len() - 1]
}

pub(crate) fn from_interior(grid: Grid1D, inner: &[f64], time: f64) -> Field {
    let mut values = vec![0.0; grid.n()];
    values[1..grid.n() - 1].copy_from_slice(inner);
    Field::from_parts(grid, values, time)
}

fn evolve_modal_diagonal(
    spec: &EquationSpec,
    gain: &Gain,
    sign: Nudging,
    w0: &Field,
    stepping: Stepping,
) -> Vec<Field> {
    let grid = spec.grid();
    let t_final = spec.t_final();
    let dst = SineTransform::new(grid.n() - 2);
    let rates = sine_rates(spec);
    let sigma = sign.sigma(gain);
    let mut coeffs = dst.analyze(interior(w0));
    let mut out = vec![from_interior(grid, &dst.synthesize(&coeffs), 0.0)];
    for i in 1..=stepping.nt {
        let (ta, tb) = (stepping.time(i - 1, t_final), stepping.time(i, t_final));
        // window overlap is measured exactly, which splits straddling steps
        let nudge = sigma * gain.temporal_exposure(ta, tb);
        let dt = tb - ta;
        for (c, r) in coeffs.iter_mut().zip(&rates) {
            *c *= (nudge - r * dt).exp();
        }
        if stepping.records(i) {
            out.push(from_interior(grid, &dst.synthesize(&coeffs), tb));
        }
    }
    out
}

/// Physical-space gain indicator at interior nodes, conjugated into sine space:
/// `G = S^-1 diag(1_support(x_j)) S`.
fn gain_matrix(grid: Grid1D, gain: &Gain) -> DMatrix<f64> {
    let m = grid.n() - 2;
    let sines = DMatrix::from_fn(m, m, |j, k| {
        ((k + 1) as f64 * PI * (j + 1) as f64 / (m + 1) as f64).sin()
    });
    let mask = DVector::from_fn(m, |j, _| {
        if gain.support().contains(grid.x(j + 1)) {
            1.0
        } else {
            0.0
        }
    });
    let masked = DMatrix::from_diagonal(&mask) * &sines;
    (sines.transpose() * masked) * (2.0 / (m + 1) as f64)
}

/// Exact propagator over `[ta, tb]` of the error equation in sine-coefficient
/// space for `c = 0`; window edges inside the interval split it into pieces.
pub(crate) fn modal_propagator(
    spec: &EquationSpec,
    gain: &Gain,
    sign: Nudging,
    ta: f64,
    tb: f64,
) -> DMatrix<f64> {
    let grid = spec.grid();
    let m = grid.n() - 2;
    let rates = sine_rates(spec);
    let g = if gain.amplitude() == 0.0 {
        DMatrix::zeros(m, m)
    } else {
        gain_matrix(grid, gain) * (sign.sigma(gain) * gain.amplitude())
    };
    let mut cuts = vec![ta, tb];
    if let Window::Interval { t1, t2 } = gain.window() {
        cuts.extend([t1, t2].into_iter().filter(|&t| t > ta && t < tb));
    }
    cuts.sort_by(f64::total_cmp);
    let mut prop = DMatrix::<f64>::identity(m, m);
    for w in cuts.windows(2) {
        let len = w[1] - w[0];
        if len <= 0.0 {
            continue;
        }
        let active = gain.window().contains(0.5 * (w[0] + w[1]));
        let piece = if active {
            let mut a = g.clone();
            for k in 0..m {
                a[(k, k)] -= rates[k];
            }
            (a * len).exp()
        } else {
            DMatrix::from_diagonal(&DVector::from_iterator(
                m,
                rates.iter().map(|r| (-r * len).exp()),
            ))
        };
        prop = piece * prop;
    }
    prop
}

fn evolve_modal_dense(
    spec: &EquationSpec,
    gain: &Gain,
    sign: Nudging,
    w0: &Field,
    stepping: Stepping,
) -> Vec<Field> {
    let grid = spec.grid();
    let t_final = spec.t_final();
    let dst = SineTransform::new(grid.n() - 2);
    let mut coeffs = DVector::from_vec(dst.analyze(interior(w0)));
    let mut out = vec![from_interior(grid, &dst.synthesize(coeffs.as_slice()), 0.0)];
    let dt = t_final / stepping.nt as f64;
    let always_on = Gain::new(gain.amplitude(), gain.kappa(), gain.support(), Window::Full)
        .expect("components of a valid gain");
    let regular = modal_propagator(spec, &always_on, sign, 0.0, dt);
    let off = modal_propagator(spec, &Gain::zero(), sign, 0.0, dt);
    for i in 1..=stepping.nt {
        let (ta, tb) = (stepping.time(i - 1, t_final), stepping.time(i, t_final));
        let straddles = match gain.window() {
            Window::Full => false,
            Window::Interval { t1, t2 } => (t1 > ta && t1 < tb) || (t2 > ta && t2 < tb),
        };
        coeffs = if straddles || (tb - ta - dt).abs() > 1e-14 * t_final {
            modal_propagator(spec, gain, sign, ta, tb) * coeffs
        } else if gain.window().contains(0.5 * (ta + tb)) {
            &regular * coeffs
        } else {
            &off * coeffs
        };
        if stepping.records(i) {
            out.push(from_interior(grid, &dst.synthesize(coeffs.as_slice()), tb));
        }
    }
    out
}

/// Thomas algorithm for a constant-band tridiagonal system with a variable diagonal.
fn solve_tridiagonal(lower: f64, diag: &[f64], upper: f64, rhs: &mut [f64]) {
    let m = diag.len();
    let mut c_prime = vec![0.0; m];
    let mut beta = diag[0];
    rhs[0] /= beta;
    for j in 1..m {
        c_prime[j - 1] = upper / beta;
        beta = diag[j] - lower * c_prime[j - 1];
        rhs[j] = (rhs[j] - lower * rhs[j - 1]) / beta;
    }
    for j in (0..m - 1).rev() {
        rhs[j] -= c_prime[j] * rhs[j + 1];
    }
}

fn evolve_crank_nicolson(
    spec: &EquationSpec,
    gain: &Gain,
    sign: Nudging,
    w0: &Field,
    stepping: Stepping,
) -> Result<Vec<Field>> {
    let c = advection_speed(spec)?;
    let grid = spec.grid();
    let t_final = spec.t_final();
    let m = grid.n() - 2;
    let h = grid.spacing();
    let nu = spec.nu();
    let sigma = sign.sigma(gain);
    let mask: Vec<f64> = (1..=m)
        .map(|j| if gain.support().contains(grid.x(j)) { 1.0 } else { 0.0 })
        .collect();
    // L w_j = lo w_{j-1} + (d + sigma K mask_j) w_j + up w_{j+1}
    let lo = nu / (h * h) + c / (2.0 * h);
    let up = nu / (h * h) - c / (2.0 * h);
    let d = -2.0 * nu / (h * h);

    let mut w: Vec<f64> = interior(w0).to_vec();
    let mut out = vec![from_interior(grid, &w, 0.0)];
    let mut rhs = vec![0.0; m];
    let mut diag = vec![0.0; m];
    let mut substep = |w: &mut Vec<f64>, ta: f64, tb: f64| {
        let dt = tb - ta;
        let k_now = if gain.window().contains(0.5 * (ta + tb)) {
            sigma * gain.amplitude()
        } else {
            0.0
        };
        for j in 0..m {
            let dj = d + k_now * mask[j];
            let left = if j > 0 { w[j - 1] } else { 0.0 };
            let right = if j + 1 < m { w[j + 1] } else { 0.0 };
            rhs[j] = w[j] + 0.5 * dt * (lo * left + dj * w[j] + up * right);
            diag[j] = 1.0 - 0.5 * dt * dj;
        }
        solve_tridiagonal(-0.5 * dt * lo, &diag, -0.5 * dt * up, &mut rhs);
        w.copy_from_slice(&rhs);
    };
    for i in 1..=stepping.nt {
        let (ta, tb) = (stepping.time(i - 1, t_final), stepping.time(i, t_final));
        let mut cuts = vec![ta];
        if let Window::Interval { t1, t2 } = gain.window() {
            cuts.extend([t1, t2].into_iter().filter(|&t| t > ta && t < tb));
        }
        cuts.push(tb);
        for win in cuts.windows(2) {
            substep(&mut w, win[0], win[1]);
        }
        if stepping.records(i) {
            out.push(from_interior(grid, &w, tb));
        }
    }
    Ok(out)
}

/// Result of a backward modal recovery.
#[derive(Debug, Clone, PartialEq)]
pub struct BackwardRecovery {
    /// The initial value whose anti-damped evolution reproduces the final
    /// field on the retained modes.
    pub field: Field,
    /// Number of modes zeroed because their amplification exceeded the cap.
    pub truncated_modes: usize,
    /// Fraction of the final field's energy carried by refused modes.
    pub refused_energy_fraction: f64,
}

/// Recovers `w~(0)` from `w~(T)` by dividing each sine coefficient by its
/// anti-damped modal factor `exp(kappa K |window| - nu (k pi)^2 T)`.
/// Modes whose diffusion exponent `nu (k pi)^2 T` exceeds `cap` are zeroed.
pub fn backward_solve_modal(
    spec: &EquationSpec,
    gain: &Gain,
    final_field: &Field,
    cap: f64,
) -> Result<BackwardRecovery> {
    let c = advection_speed(spec)?;
    if c != 0.0 || !gain.is_spatially_uniform() {
        return Err(BfnError::UnsupportedRegime {
            anchor: "backward modal recovery".into(),
            reason: "needs c = 0 and a spatially uniform gain (modal-diagonal backward system)".into(),
        });
    }
    check_field(spec, final_field, "final field")?;
    let grid = spec.grid();
    let t_final = spec.t_final();
    let dst = SineTransform::new(grid.n() - 2);
    let coeffs = dst.analyze(interior(final_field));
    let rates = sine_rates(spec);
    let growth = gain.kappa() * gain.temporal_exposure(0.0, t_final);
    let total: f64 = coeffs.iter().map(|c| c * c).sum();
    let mut refused_energy = 0.0;
    let mut truncated = 0;
    let recovered: Vec<f64> = coeffs
        .iter()
        .zip(&rates)
        .map(|(&ck, &r)| {
            if r * t_final > cap {
                truncated += 1;
                refused_energy += ck * ck;
                0.0
            } else {
                ck * (r * t_final - growth).exp()
            }
        })
        .collect();
    let fraction = if total > 0.0 { refused_energy / total } else { 0.0 };
    if fraction > 0.5 {
        return Err(BfnError::Truncation {
            refused_modes: truncated,
            refused_energy_fraction: fraction,
        });
    }
    Ok(BackwardRecovery {
        field: from_interior(grid, &dst.synthesize(&recovered), 0.0),
        truncated_modes: truncated,
        refused_energy_fraction: fraction,
    })
}

/// Gain shapes for which the one-step viscous linear BFN has a closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Theorem1Case {
    ConstantK,
    TemporalWindow,
}

impl Theorem1Case {
    pub fn classify(gain: &Gain) -> Result<Self> {
        if !gain.is_spatially_uniform() {
            return Err(BfnError::NoOracle(
                "spatially supported gains: the one-step viscous BFN has no solution in general (Theorem 1, case 2)"
                    .into(),
            ));
        }
        Ok(match gain.window() {
            Window::Full => Theorem1Case::ConstantK,
            Window::Interval { .. } => Theorem1Case::TemporalWindow,
        })
    }
}

/// Predicted ratio `w~(t) / w(t)`: `exp(-(K + K') |[t, T] ∩ window|)`.
///
/// For a constant gain this is `exp(-(K + K')(T - t))`; for a window at
/// `t = 0` it is `exp(-(K + K')(t2 - t1))`, and it stays equal to one once
/// `t` is past the window.
pub fn theorem1_oracle(gain: &Gain, t_final: f64, t: f64) -> Result<f64> {
    Theorem1Case::classify(gain)?;
    if !(0.0..=t_final).contains(&t) {
        return Err(BfnError::InvalidArgument(format!(
            "t = {t} outside [0, {t_final}]"
        )));
    }
    Ok((-(1.0 + gain.kappa()) * gain.temporal_exposure(t, t_final)).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::l2_norm;

    fn spec(nu: f64, c: f64, n: usize) -> EquationSpec {
        EquationSpec::viscous_linear(nu, c, n, 1.0).unwrap()
    }

    #[test]
    fn single_mode_decays_exactly() {
        let s = spec(0.01, 0.0, 65);
        let g = Gain::constant(1.0, 1.0).unwrap();
        let ic = Field::from_fn(s.grid(), 0.0, |x| (PI * x).sin());
        let tr = solve_forward_linear(&s, &g, Nudging::Damping, &ic, &Observations::Zero, Stepping::new(100)).unwrap();
        let ratio = l2_norm(tr.last()) / l2_norm(&ic);
        let want = (-1.0 - 0.01 * PI * PI).exp();
        assert!((ratio - want).abs() < 1e-10, "{ratio} vs {want}");
    }

    #[test]
    fn fixed_point_when_ic_matches_observations() {
        let s = spec(0.02, 0.5, 33);
        let g = Gain::spatial(3.0, 1.0, 0.2, 0.6).unwrap();
        let obs0 = Field::from_fn(s.grid(), 0.0, |x| (2.0 * PI * x).sin());
        let tr = solve_forward_linear(&s, &g, Nudging::Damping, &obs0, &Observations::Free(obs0.clone()), Stepping::new(50)).unwrap();
        let free = solve_forward_linear(&s, &Gain::zero(), Nudging::Damping, &obs0, &Observations::Zero, Stepping::new(50)).unwrap();
        for (a, b) in tr.snapshots().iter().zip(free.snapshots()) {
            assert_eq!(a.values(), b.values());
        }
    }

    #[test]
    fn rejects_inviscid_and_profiles() {
        let inv = EquationSpec::inviscid_linear(Advection::Constant(1.0), 16, 1.0).unwrap();
        let ic = Field::zeros(inv.grid(), 0.0);
        let g = Gain::zero();
        assert!(matches!(
            solve_forward_linear(&inv, &g, Nudging::Damping, &ic, &Observations::Zero, Stepping::new(4)),
            Err(BfnError::UnsupportedRegime { .. })
        ));
        let grid = Grid1D::dirichlet(16).unwrap();
        let prof = EquationSpec::new(0.1, Advection::Profile(vec![1.0; 16]), grid, 1.0).unwrap();
        let ic = Field::zeros(grid, 0.0);
        assert!(matches!(
            solve_forward_linear(&prof, &g, Nudging::Damping, &ic, &Observations::Zero, Stepping::new(4)),
            Err(BfnError::UnsupportedRegime { .. })
        ));
    }

    #[test]
    fn dense_path_matches_diagonal_for_full_support() {
        let s = spec(0.01, 0.0, 33);
        let g = Gain::windowed(2.0, 0.5, 0.3, 0.7).unwrap();
        let ic = Field::from_fn(s.grid(), 0.0, |x| x * (1.0 - x));
        let diag = evolve_modal_diagonal(&s, &g, Nudging::AntiDamping, &ic, Stepping::new(7));
        let dense = evolve_modal_dense(&s, &g, Nudging::AntiDamping, &ic, Stepping::new(7));
        for (a, b) in diag.iter().zip(&dense) {
            for (x, y) in a.values().iter().zip(b.values()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn truncation_error_when_energy_is_refused() {
        let s = spec(0.01, 0.0, 129);
        let g = Gain::constant(1.0, 1.0).unwrap();
        // nu (k pi)^2 T > 40 for k = 30
        let f = Field::from_fn(s.grid(), 1.0, |x| (30.0 * PI * x).sin());
        assert!(matches!(
            backward_solve_modal(&s, &g, &f, DEFAULT_AMPLIFICATION_CAP),
            Err(BfnError::Truncation { .. })
        ));
    }

    #[test]
    fn theorem1_oracle_values() {
        let none = Gain::constant(0.0, 1.0).unwrap();
        assert_eq!(theorem1_oracle(&none, 1.0, 0.3).unwrap(), 1.0);
        let k = Gain::constant(1.0, 1.0).unwrap();
        assert!((theorem1_oracle(&k, 1.0, 0.0).unwrap() - (-2.0_f64).exp()).abs() < 1e-15);
        let w = Gain::windowed(1.0, 1.0, 0.25, 0.75).unwrap();
        assert!((theorem1_oracle(&w, 1.0, 0.0).unwrap() - (-1.0_f64).exp()).abs() < 1e-15);
        assert_eq!(theorem1_oracle(&w, 1.0, 0.9).unwrap(), 1.0);
        let sp = Gain::spatial(1.0, 1.0, 0.0, 0.5).unwrap();
        assert!(matches!(theorem1_oracle(&sp, 1.0, 0.0), Err(BfnError::NoOracle(_))));
    }
}
