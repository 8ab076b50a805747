//! Inviscid Bürgers BFN sweeps along self-consistent characteristics.
//!
//! Each curve carries its position `X` and the error `w = u - u_obs(t, X)`:
//!
//! `dX/dt = u_obs(t, X) + w`, `dw/dt = (sigma K(t, X) - u_obs_x(t, X)) w`,
//!
//! which is the error equation written along the curves of the nudged
//! solution. Steps are split where a curve meets the edge of the gain support
//! or the window opens or closes, so RK4 never sees a discontinuous gain.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::characteristics::{grid_trajectory, sample_grid, shock_time, BoundaryData, CharField, CharacteristicRun};
use crate::equation::{EquationClass, EquationSpec};
use crate::error::{BfnError, Result};
use crate::field::{l2_norm, linf_grad, Field};
use crate::gain::{Gain, Window};
use crate::path::PathSegment;
use crate::spectral::TrigSeries;
use crate::trajectory::{Observations, Sweep, Trajectory};

/// Observations of the inviscid Bürgers model evaluated anywhere in (t, x).
#[derive(Debug, Clone)]
pub enum ObservationModel {
    Zero,
    /// Unnudged evolution of a smooth periodic field, solved from
    /// `x = xi + g(xi) t` (valid before the shock).
    Implicit(TrigSeries),
    Sampled(Trajectory),
}

impl ObservationModel {
    pub fn new(uobs: &Observations) -> Self {
        match uobs {
            Observations::Zero => ObservationModel::Zero,
            Observations::Free(f) => ObservationModel::Implicit(TrigSeries::from_field(f)),
            Observations::Sampled(tr) => ObservationModel::Sampled(tr.clone()),
        }
    }

    /// `(u_obs, d u_obs / dx)` at `(t, y)`.
    pub fn eval(&self, t: f64, y: f64) -> (f64, f64) {
        match self {
            ObservationModel::Zero => (0.0, 0.0),
            ObservationModel::Implicit(g) => {
                let mut xi = y - g.eval(y) * t;
                let (mut v, mut s) = g.eval_with_slope(xi);
                for _ in 0..60 {
                    let step = (xi + v * t - y) / (1.0 + s * t);
                    xi -= step;
                    (v, s) = g.eval_with_slope(xi);
                    if step.abs() <= 1e-15 * (1.0 + y.abs()) {
                        break;
                    }
                }
                (v, s / (1.0 + s * t))
            }
            ObservationModel::Sampled(tr) => {
                let h = tr.spec().grid().spacing();
                let v = tr.value_at(t, y);
                let s = (tr.value_at(t, y + h) - tr.value_at(t, y - h)) / (2.0 * h);
                (v, s)
            }
        }
    }

    /// Observations sampled on `grid` at time `t`.
    pub fn field(&self, grid: crate::grid::Grid1D, t: f64) -> Field {
        Field::from_fn(grid, t, |x| self.eval(t, x).0)
    }
}

/// Right-hand side with the gain frozen to `k_now` (already signed).
fn rhs(obs: &ObservationModel, k_now: f64, t: f64, x: f64, w: f64) -> (f64, f64) {
    let (u, ux) = obs.eval(t, x);
    (u + w, (k_now - ux) * w)
}

fn rk4(obs: &ObservationModel, k_now: f64, t: f64, h: f64, x: f64, w: f64) -> (f64, f64) {
    let (a1, b1) = rhs(obs, k_now, t, x, w);
    let (a2, b2) = rhs(obs, k_now, t + 0.5 * h, x + 0.5 * h * a1, w + 0.5 * h * b1);
    let (a3, b3) = rhs(obs, k_now, t + 0.5 * h, x + 0.5 * h * a2, w + 0.5 * h * b2);
    let (a4, b4) = rhs(obs, k_now, t + h, x + h * a3, w + h * b3);
    (
        x + h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4),
        w + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4),
    )
}

struct CurveStepper<'a> {
    obs: &'a ObservationModel,
    gain: &'a Gain,
    sigma: f64,
}

impl CurveStepper<'_> {
    /// Signed gain on `[t, t + h]` for a curve at `x` moving with speed `v`.
    fn gain_on(&self, t: f64, h: f64, x: f64, v: f64) -> f64 {
        if self.gain.amplitude() == 0.0 || !self.gain.window().contains(t + 0.5 * h) {
            return 0.0;
        }
        // probe slightly ahead so a curve sitting on an edge picks the side it enters
        let probe = x + (v * h).signum() * 1e-10;
        if self.gain.support().contains(probe) {
            self.sigma * self.gain.amplitude()
        } else {
            0.0
        }
    }

    /// Advances `(x, w)` from `t` to `t + h` (`h` may be negative).
    fn advance(&self, t: f64, h: f64, x: f64, w: f64) -> (f64, f64) {
        let mut cuts = vec![t, t + h];
        if let Window::Interval { t1, t2 } = self.gain.window() {
            let (lo, hi) = if h > 0.0 { (t, t + h) } else { (t + h, t) };
            cuts.extend([t1, t2].into_iter().filter(|&c| c > lo && c < hi));
        }
        if h > 0.0 {
            cuts.sort_by(f64::total_cmp);
        } else {
            cuts.sort_by(|a, b| b.total_cmp(a));
        }
        let (mut x, mut w) = (x, w);
        for c in cuts.windows(2) {
            (x, w) = self.advance_smooth_window(c[0], c[1] - c[0], x, w);
        }
        (x, w)
    }

    /// Same as `advance` on a piece where the window state is constant;
    /// splits at support edges.
    fn advance_smooth_window(&self, t: f64, h: f64, x: f64, w: f64) -> (f64, f64) {
        let support = self.gain.support();
        let (mut t, mut x, mut w) = (t, x, w);
        let mut remaining = h;
        for _ in 0..16 {
            if remaining == 0.0 {
                break;
            }
            let v0 = self.obs.eval(t, x).0 + w;
            let k_now = self.gain_on(t, remaining, x, v0);
            let (x1, w1) = rk4(self.obs, k_now, t, remaining, x, w);
            if self.gain.amplitude() == 0.0 || support.is_full() {
                return (x1, w1);
            }
            let v1 = self.obs.eval(t + remaining, x1).0 + w1;
            // the Hermite path in local time (always forward) locates edge crossings
            let seg = PathSegment::new(0.0, 1.0, x, x1, v0 * remaining, v1 * remaining);
            let hit = seg
                .crossings(&support)
                .into_iter()
                .find(|(th, _)| *th * remaining.abs() > 1e-13);
            let Some((theta, edge)) = hit else {
                return (x1, w1);
            };
            // Newton on the sub-step length so the curve lands on the edge
            let mut tau = theta * remaining;
            let mut landed = rk4(self.obs, k_now, t, tau, x, w);
            for _ in 0..8 {
                let speed = self.obs.eval(t + tau, landed.0).0 + landed.1;
                if speed == 0.0 {
                    break;
                }
                let dtau = (landed.0 - edge) / speed;
                tau -= dtau;
                landed = rk4(self.obs, k_now, t, tau, x, w);
                if dtau.abs() <= 1e-15 * remaining.abs() {
                    break;
                }
            }
            if !(tau * remaining > 0.0 && tau.abs() < remaining.abs()) {
                return (x1, w1);
            }
            t += tau;
            remaining -= tau;
            (x, w) = landed;
        }
        if remaining != 0.0 {
            let v = self.obs.eval(t, x).0 + w;
            let k_now = self.gain_on(t, remaining, x, v);
            return rk4(self.obs, k_now, t, remaining, x, w);
        }
        (x, w)
    }
}

fn check_class(spec: &EquationSpec) -> Result<()> {
    if spec.class() != EquationClass::InviscidBurgers {
        return Err(BfnError::InvalidSpec(
            "this solver handles the inviscid Bürgers equation only".into(),
        ));
    }
    Ok(())
}

/// Refuses final times at or past the shock time of a field.
fn shock_guard(f: &Field, t_final: f64) -> Result<()> {
    let ts = shock_time(f);
    if t_final >= ts {
        let foot = crate::field::slopes(f)
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map_or(0, |(j, _)| j);
        return Err(BfnError::Crossing { time: ts, foot });
    }
    Ok(())
}

/// One inviscid Bürgers BFN sweep over `[0, T]` with `nt` steps.
///
/// Forward sweeps start at the grid nodes from `BoundaryData::Initial`.
/// Backward sweeps start at `t = T` (from grid data or from the end of a
/// forward run) and integrate the `+K'` system down to `t = 0`; the returned
/// curves are stored in increasing time, so their feet are the landing points.
pub fn solve_inviscid_burgers(
    spec: &EquationSpec,
    gain: &Gain,
    sweep: Sweep,
    boundary: &BoundaryData,
    uobs: &Observations,
    nt: usize,
) -> Result<CharacteristicRun> {
    check_class(spec)?;
    if nt == 0 {
        return Err(BfnError::InvalidArgument("nt must be positive".into()));
    }
    let t_final = spec.t_final();
    let grid = spec.grid();
    if let Observations::Free(f0) = uobs {
        shock_guard(f0, t_final)?;
    }
    let obs = ObservationModel::new(uobs);
    let t_start = match sweep {
        Sweep::Forward => 0.0,
        Sweep::Backward => t_final,
    };
    let (x0, u0): (Vec<f64>, Vec<f64>) = match (sweep, boundary) {
        (Sweep::Forward, BoundaryData::Initial(f)) => {
            shock_guard(f, t_final)?;
            (grid.nodes(), f.values().to_vec())
        }
        (Sweep::Backward, BoundaryData::Final(f)) => (grid.nodes(), f.values().to_vec()),
        (Sweep::Backward, BoundaryData::FinalCarried { positions, values }) => {
            if positions.len() != values.len() || positions.len() < 3 {
                return Err(BfnError::InvalidArgument(
                    "carried final data needs matching positions and values".into(),
                ));
            }
            (positions.clone(), values.clone())
        }
        _ => {
            return Err(BfnError::InvalidArgument(
                "forward sweeps start from initial data, backward sweeps from final data".into(),
            ))
        }
    };
    if let Some(f) = match boundary {
        BoundaryData::Initial(f) | BoundaryData::Final(f) => Some(f),
        BoundaryData::FinalCarried { .. } => None,
    } {
        if *f.grid() != grid {
            return Err(BfnError::InvalidArgument(
                "boundary data must live on the equation's grid".into(),
            ));
        }
    }
    let stepper = CurveStepper {
        obs: &obs,
        gain,
        sigma: match sweep {
            Sweep::Forward => -1.0,
            Sweep::Backward => gain.kappa(),
        },
    };
    let dt = t_final / nt as f64;
    let clock = |i: usize| -> f64 {
        // time after i steps in the sweep's direction
        let s = if i == nt { t_final } else { i as f64 * dt };
        match sweep {
            Sweep::Forward => s,
            Sweep::Backward => t_final - s,
        }
    };
    let curves: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = x0
        .par_iter()
        .zip(u0.par_iter())
        .map(|(&x_start, &u_start)| {
            let mut xs = Vec::with_capacity(nt + 1);
            let mut ws = Vec::with_capacity(nt + 1);
            let mut vs = Vec::with_capacity(nt + 1);
            let (uo, _) = obs.eval(t_start, x_start);
            let (mut x, mut w) = (x_start, u_start - uo);
            xs.push(x);
            ws.push(w);
            vs.push(u_start);
            for i in 0..nt {
                let (ta, tb) = (clock(i), clock(i + 1));
                (x, w) = stepper.advance(ta, tb - ta, x, w);
                xs.push(x);
                ws.push(w);
                vs.push(obs.eval(tb, x).0 + w);
            }
            if sweep == Sweep::Backward {
                xs.reverse();
                ws.reverse();
                vs.reverse();
            }
            (xs, ws, vs)
        })
        .collect();
    let times: Vec<f64> = (0..=nt).map(|i| if i == nt { t_final } else { i as f64 * dt }).collect();
    let mut lifted = Vec::with_capacity(curves.len());
    let mut errors = Vec::with_capacity(curves.len());
    let mut speed = Vec::with_capacity(curves.len());
    for (x, w, v) in curves {
        lifted.push(x);
        errors.push(w);
        speed.push(v);
    }
    // the carried value is u itself, which is also the curve speed
    let cf = CharField::new(times, lifted, speed.clone())?.with_carried(speed)?;
    let carried = cf.carried().expect("just set").to_vec();
    let trajectory = grid_trajectory(spec, &cf, &carried)?;
    Ok(CharacteristicRun {
        trajectory,
        chars: cf,
        errors,
    })
}

/// Observations on the grid at the given times.
pub fn observation_trajectory(spec: &EquationSpec, uobs: &Observations, times: &[f64]) -> Result<Trajectory> {
    let obs = ObservationModel::new(uobs);
    let grid = spec.grid();
    let snapshots = times.par_iter().map(|&t| obs.field(grid, t)).collect();
    Trajectory::new(spec.clone(), snapshots)
}

/// `max_t linf_grad(u_obs(t))` over a stored observation trajectory.
pub fn observation_gradient_bound(obs: &Trajectory) -> f64 {
    obs.snapshots().iter().map(linf_grad).fold(0.0, f64::max)
}

/// Per-foot check of the along-curve error formula:
/// `|w(T, psi(T, x)) - w(0, x) exp(-int K - int u_obs_x)|`, with `int K` exact
/// along the curves and `int u_obs_x` by the trapezoid rule at stored times.
pub fn proposition7_check(gain: &Gain, run: &CharacteristicRun, uobs: &Observations) -> Vec<f64> {
    let obs = ObservationModel::new(uobs);
    let cf = &run.chars;
    let times = cf.times();
    let last = times.len() - 1;
    (0..cf.n_feet())
        .into_par_iter()
        .map(|j| {
            let k_int = cf.integrate_gain(gain, j, times[0], times[last]);
            let slope: Vec<f64> = (0..=last)
                .map(|i| obs.eval(times[i], cf.lifted(j)[i]).1)
                .collect();
            let s_int: f64 = (0..last)
                .map(|i| 0.5 * (times[i + 1] - times[i]) * (slope[i] + slope[i + 1]))
                .sum();
            let predicted = run.errors[j][0] * (-k_int - s_int).exp();
            (run.errors[j][last] - predicted).abs()
        })
        .collect()
}

/// Both sides of the norm bound at one stored time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSample {
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub satisfied: bool,
}

/// `||w~(t)|| <= exp(-(K + K') |[t, T] ∩ window| + M (T - t)) ||w(t)||` at
/// every stored time, norms on the grid. Only spatially uniform gains have
/// this bound.
pub fn theorem6_bound_check(
    gain: &Gain,
    forward: &Trajectory,
    backward: &Trajectory,
    observations: &Trajectory,
    m_bound: f64,
) -> Result<Vec<BoundSample>> {
    if !gain.is_spatially_uniform() {
        return Err(BfnError::NoOracle(
            "norm bound covers constant and windowed gains only".into(),
        ));
    }
    if forward.times() != backward.times() || forward.times() != observations.times() {
        return Err(BfnError::InvalidArgument(
            "forward, backward and observation trajectories must share their times".into(),
        ));
    }
    let t_final = *forward.times().last().expect("non-empty");
    let scale = 1.0 + gain.kappa();
    forward
        .snapshots()
        .iter()
        .zip(backward.snapshots())
        .zip(observations.snapshots())
        .map(|((u, ut), o)| {
            let t = u.time();
            let lhs = l2_norm(&ut.sub(o)?);
            let exponent = -scale * gain.temporal_exposure(t, t_final) + m_bound * (t_final - t);
            let rhs = exponent.exp() * l2_norm(&u.sub(o)?);
            Ok(BoundSample {
                t,
                lhs,
                rhs,
                satisfied: lhs <= rhs,
            })
        })
        .collect()
}

/// Grid samples of a field at lifted points (periodic cubic interpolation).
pub fn sample_at(f: &Field, points: &[f64]) -> Result<Vec<f64>> {
    sample_grid(f, points)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use std::f64::consts::PI;

    #[test]
    fn implicit_observations_satisfy_the_characteristic_relation() {
        let g = Grid1D::periodic(128).unwrap();
        let f0 = Field::from_fn(g, 0.0, |x| 0.1 * (2.0 * PI * x + 0.5).sin());
        let obs = ObservationModel::new(&Observations::Free(f0));
        let (t, xi) = (0.7, 0.3);
        let g0 = 0.1 * (2.0 * PI * xi + 0.5).sin();
        let y = xi + g0 * t;
        let (u, _) = obs.eval(t, y);
        assert!((u - g0).abs() < 1e-14);
    }

    #[test]
    fn zero_gain_conserves_values() {
        let spec = EquationSpec::inviscid_burgers(128, 0.5).unwrap();
        let u0 = Field::from_fn(spec.grid(), 0.0, |x| 0.2 * (2.0 * PI * x).sin());
        let run = solve_inviscid_burgers(
            &spec,
            &Gain::zero(),
            Sweep::Forward,
            &BoundaryData::Initial(u0.clone()),
            &Observations::Zero,
            200,
        )
        .unwrap();
        for (j, &x) in spec.grid().nodes().iter().enumerate() {
            let end = *run.chars.lifted(j).last().unwrap();
            assert_eq!(run.errors[j].last().copied(), Some(u0.values()[j]));
            assert!((end - (x + u0.values()[j] * 0.5)).abs() < 1e-12);
        }
    }

    #[test]
    fn refuses_past_the_shock() {
        let spec = EquationSpec::inviscid_burgers(64, 1.0).unwrap();
        let u0 = Field::from_fn(spec.grid(), 0.0, |x| 0.5 * (2.0 * PI * x).sin());
        let r = solve_inviscid_burgers(
            &spec,
            &Gain::zero(),
            Sweep::Forward,
            &BoundaryData::Initial(u0),
            &Observations::Zero,
            10,
        );
        assert!(matches!(r, Err(BfnError::Crossing { .. })));
    }
}
