//! Characteristic curves on the torus for the inviscid equations, occupation
//! times of the gain support, and the linear transport BFN solved exactly
//! along the curves.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equation::{Advection, EquationClass, EquationSpec};
use crate::error::{BfnError, Result};
use crate::field::{slopes, Field};
use crate::gain::{Gain, Support, Window};
use crate::interp::{first_crossing, interpolate_periodic, lerp_periodic, resample_periodic};
use crate::path::PathSegment;
use crate::trajectory::{Observations, Sweep, Trajectory};

/// Ordering tolerance of the non-crossing check.
pub const CROSSING_TOL: f64 = 1e-12;
/// Occupation times at or below this count as zero for observability.
pub const OBSERVABILITY_TOL: f64 = 1e-9;

/// Transport velocity driving the curves.
#[derive(Debug, Clone, PartialEq)]
pub enum Velocity {
    /// Samples of `a(x)` at the periodic nodes `j / n`.
    Profile(Vec<f64>),
    /// A stored solution `u(t, x)` advecting the curves.
    Frozen(Trajectory),
}

impl Velocity {
    pub fn from_spec(spec: &EquationSpec) -> Result<Self> {
        if spec.class() != EquationClass::InviscidLinear {
            return Err(BfnError::InvalidSpec(
                "a velocity profile exists only for the inviscid linear equation".into(),
            ));
        }
        Ok(match spec.advection() {
            Advection::Constant(c) => Velocity::Profile(vec![*c; spec.grid().n()]),
            Advection::Profile(a) => Velocity::Profile(a.clone()),
            Advection::SelfAdvection => unreachable!("class checked above"),
        })
    }

    fn at(&self, t: f64, x: f64) -> f64 {
        match self {
            Velocity::Profile(a) => lerp_periodic(a, x),
            Velocity::Frozen(tr) => tr.value_at(t, x),
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Velocity::Profile(a) if a.len() < 4 || a.iter().any(|v| !v.is_finite()) => Err(
                BfnError::InvalidArgument("velocity profile needs >= 4 finite samples".into()),
            ),
            Velocity::Frozen(tr) if !tr.spec().grid().is_periodic() => Err(
                BfnError::InvalidArgument("frozen velocity must live on a periodic grid".into()),
            ),
            _ => Ok(()),
        }
    }
}

/// A family of curves `psi(s, x)` stored on the lifted line, one per foot,
/// with their velocities and optionally a value carried along each.
#[derive(Debug, Clone, PartialEq)]
pub struct CharField {
    feet: Vec<f64>,
    times: Vec<f64>,
    lifted: Vec<Vec<f64>>,
    speed: Vec<Vec<f64>>,
    carried: Option<Vec<Vec<f64>>>,
}

impl CharField {
    /// `lifted[j][i]` and `speed[j][i]` are position and velocity of curve `j`
    /// at `times[i]`. Feet are the positions at the first time. Fails with
    /// `Crossing` if the curves are out of order at any stored time.
    pub fn new(times: Vec<f64>, lifted: Vec<Vec<f64>>, speed: Vec<Vec<f64>>) -> Result<Self> {
        if times.len() < 2 || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(BfnError::InvalidArgument(
                "curve times must be increasing with at least two entries".into(),
            ));
        }
        if lifted.len() < 3
            || lifted.len() != speed.len()
            || lifted
                .iter()
                .zip(&speed)
                .any(|(p, v)| p.len() != times.len() || v.len() != times.len())
        {
            return Err(BfnError::InvalidArgument(
                "need at least 3 curves, each sampled at every time".into(),
            ));
        }
        let feet = lifted.iter().map(|p| p[0]).collect();
        let cf = Self {
            feet,
            times,
            lifted,
            speed,
            carried: None,
        };
        cf.check_order()?;
        Ok(cf)
    }

    fn check_order(&self) -> Result<()> {
        for i in 0..self.times.len() {
            if let Some(foot) = first_crossing(&self.lifted_at(i), CROSSING_TOL) {
                return Err(BfnError::Crossing {
                    time: self.times[i],
                    foot,
                });
            }
        }
        Ok(())
    }

    pub fn feet(&self) -> &[f64] {
        &self.feet
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn n_feet(&self) -> usize {
        self.feet.len()
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("at least two times")
    }

    /// Unwrapped positions of curve `j`.
    pub fn lifted(&self, j: usize) -> &[f64] {
        &self.lifted[j]
    }

    pub fn speed(&self, j: usize) -> &[f64] {
        &self.speed[j]
    }

    pub fn lifted_at(&self, i: usize) -> Vec<f64> {
        self.lifted.iter().map(|p| p[i]).collect()
    }

    /// Positions at time index `i`, wrapped into [0, 1).
    pub fn positions_at(&self, i: usize) -> Vec<f64> {
        self.lifted.iter().map(|p| p[i].rem_euclid(1.0)).collect()
    }

    /// Values carried along the curves, `carried[j][i]`.
    pub fn carried(&self) -> Option<&[Vec<f64>]> {
        self.carried.as_deref()
    }

    pub fn carried_at(&self, i: usize) -> Option<Vec<f64>> {
        self.carried
            .as_ref()
            .map(|c| c.iter().map(|v| v[i]).collect())
    }

    pub fn with_carried(mut self, carried: Vec<Vec<f64>>) -> Result<Self> {
        if carried.len() != self.n_feet() || carried.iter().any(|c| c.len() != self.times.len()) {
            return Err(BfnError::InvalidArgument(
                "carried values must match the curve layout".into(),
            ));
        }
        self.carried = Some(carried);
        Ok(self)
    }

    /// Cubic Hermite piece of curve `j` between time indices `i` and `i + 1`.
    pub fn segment(&self, j: usize, i: usize) -> PathSegment {
        PathSegment::new(
            self.times[i],
            self.times[i + 1],
            self.lifted[j][i],
            self.lifted[j][i + 1],
            self.speed[j][i],
            self.speed[j][i + 1],
        )
    }

    /// `int_from^to K(s, psi(s, x_j)) ds`, exact for the Hermite path.
    pub fn integrate_gain(&self, gain: &Gain, j: usize, from: f64, to: f64) -> f64 {
        if gain.amplitude() == 0.0 {
            return 0.0;
        }
        let (lo, hi) = match gain.window() {
            Window::Full => (from, to),
            Window::Interval { t1, t2 } => (from.max(t1), to.min(t2)),
        };
        if hi <= lo {
            return 0.0;
        }
        if gain.support().is_full() {
            return gain.amplitude() * (hi - lo);
        }
        let window = Window::Interval { t1: lo, t2: hi };
        let support = gain.support();
        let last = self.times.len() - 1;
        let first = self.times.partition_point(|&t| t <= lo).saturating_sub(1);
        let mut total = 0.0;
        for i in first..last {
            if self.times[i] >= hi {
                break;
            }
            if self.times[i + 1] <= lo {
                continue;
            }
            total += self.segment(j, i).measure_inside(&support, Some(&window));
        }
        gain.amplitude() * total
    }

    /// Time curve `j` spends inside `support` over the whole stored interval.
    pub fn occupation(&self, support: &Support, j: usize) -> f64 {
        if support.is_full() {
            return self.t_end() - self.t_start();
        }
        (0..self.times.len() - 1)
            .map(|i| self.segment(j, i).measure_inside(support, None))
            .sum()
    }
}

/// Traces `d psi / ds = velocity(s, psi)` from each foot over `[0, T]` with
/// classical RK4. Feet must be increasing and span less than one period.
pub fn trace(velocity: &Velocity, feet: &[f64], t_final: f64, nt: usize) -> Result<CharField> {
    velocity.validate()?;
    if nt == 0 || !(t_final > 0.0 && t_final.is_finite()) {
        return Err(BfnError::InvalidArgument(
            "tracing needs nt >= 1 and a positive final time".into(),
        ));
    }
    if feet.len() < 3 || first_crossing(feet, 0.0).is_some() {
        return Err(BfnError::InvalidArgument(
            "feet must be at least 3 increasing points spanning less than one period".into(),
        ));
    }
    let dt = t_final / nt as f64;
    let times: Vec<f64> = (0..=nt)
        .map(|i| if i == nt { t_final } else { i as f64 * dt })
        .collect();
    let curves: Vec<(Vec<f64>, Vec<f64>)> = feet
        .par_iter()
        .map(|&x0| {
            let mut pos = Vec::with_capacity(nt + 1);
            let mut vel = Vec::with_capacity(nt + 1);
            let mut x = x0;
            pos.push(x);
            vel.push(velocity.at(0.0, x));
            for i in 0..nt {
                let (t, h) = (times[i], times[i + 1] - times[i]);
                let k1 = vel[i];
                let k2 = velocity.at(t + 0.5 * h, x + 0.5 * h * k1);
                let k3 = velocity.at(t + 0.5 * h, x + 0.5 * h * k2);
                let k4 = velocity.at(t + h, x + h * k3);
                x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                pos.push(x);
                vel.push(velocity.at(times[i + 1], x));
            }
            (pos, vel)
        })
        .collect();
    let (lifted, speed) = curves.into_iter().unzip();
    CharField::new(times, lifted, speed)
}

/// Occupation time `chi(x)` of each curve in the gain's spatial support.
pub fn chi(gain: &Gain, cf: &CharField) -> Vec<f64> {
    let support = gain.support();
    (0..cf.n_feet())
        .into_par_iter()
        .map(|j| cf.occupation(&support, j))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObservabilityCertificate {
    /// `min_x chi(x)`.
    pub m: f64,
    pub observable: bool,
    /// Gain amplitude above which the error provably decreases, `M T / m`;
    /// infinite when not observable.
    pub k_threshold: f64,
}

pub fn observability_certificate(gain: &Gain, cf: &CharField, m_bound: f64) -> ObservabilityCertificate {
    let m = chi(gain, cf).into_iter().fold(f64::INFINITY, f64::min);
    let observable = m > OBSERVABILITY_TOL;
    let duration = cf.t_end() - cf.t_start();
    ObservabilityCertificate {
        m,
        observable,
        k_threshold: if observable {
            m_bound * duration / m
        } else {
            f64::INFINITY
        },
    }
}

/// Predicted `w~(t, psi(t, x)) / w(t, psi(t, x))` per foot:
/// `exp(-(1 + kappa) int_t^T K(psi(s, x)) ds)`.
pub fn theorem4_oracle(gain: &Gain, cf: &CharField, t: f64) -> Result<Vec<f64>> {
    let (t0, t_final) = (cf.t_start(), cf.t_end());
    if !(t0..=t_final).contains(&t) {
        return Err(BfnError::InvalidArgument(format!(
            "t = {t} outside [{t0}, {t_final}]"
        )));
    }
    let scale = 1.0 + gain.kappa();
    Ok((0..cf.n_feet())
        .into_par_iter()
        .map(|j| (-scale * cf.integrate_gain(gain, j, t, t_final)).exp())
        .collect())
}

/// First time characteristics of `u_t + u u_x = 0` cross, `-1 / min u0'`,
/// from finite-difference slopes; infinite when `u0` is nowhere decreasing.
pub fn shock_time(u0: &Field) -> f64 {
    let min = slopes(u0).into_iter().fold(f64::INFINITY, f64::min);
    if min < 0.0 {
        -1.0 / min
    } else {
        f64::INFINITY
    }
}

/// Data a sweep starts from.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryData {
    /// Grid field at `t = 0` (forward sweeps).
    Initial(Field),
    /// Grid field at `t = T` (backward sweeps).
    Final(Field),
    /// Values already sitting at lifted positions at `t = T`, typically the
    /// end of a forward sweep's curves.
    FinalCarried { positions: Vec<f64>, values: Vec<f64> },
}

/// A sweep solved along characteristics.
#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicRun {
    /// Solution resampled on the grid at every stored time.
    pub trajectory: Trajectory,
    /// The curves, carrying `u`.
    pub chars: CharField,
    /// Error `u - u_obs` along each curve, `errors[j][i]`.
    pub errors: Vec<Vec<f64>>,
}

impl CharacteristicRun {
    pub fn errors_at(&self, i: usize) -> Vec<f64> {
        self.errors.iter().map(|e| e[i]).collect()
    }

    /// Final state on the curves, the starting data of the next backward sweep.
    pub fn final_carried(&self) -> BoundaryData {
        let last = self.chars.times().len() - 1;
        BoundaryData::FinalCarried {
            positions: self.chars.lifted_at(last),
            values: self.chars.carried_at(last).expect("runs always carry values"),
        }
    }
}

/// Values of a grid field at arbitrary points.
pub(crate) fn sample_grid(f: &Field, points: &[f64]) -> Result<Vec<f64>> {
    let nodes = f.grid().nodes();
    interpolate_periodic(&nodes, f.values(), points)
}

/// Resamples values carried on `cf` onto the spec's grid at every stored time.
pub(crate) fn grid_trajectory(
    spec: &EquationSpec,
    cf: &CharField,
    carried: &[Vec<f64>],
) -> Result<Trajectory> {
    let grid = spec.grid();
    let snapshots = (0..cf.times().len())
        .into_par_iter()
        .map(|i| {
            let vals: Vec<f64> = carried.iter().map(|c| c[i]).collect();
            let values = resample_periodic(&cf.lifted_at(i), &vals, grid.n())?;
            Field::new(grid, values, cf.times()[i])
        })
        .collect::<Result<Vec<_>>>()?;
    Trajectory::new(spec.clone(), snapshots)
}

/// Observations along the curves of the unnudged linear transport.
fn observations_along(uobs: &Observations, cf: &CharField) -> Result<Vec<Vec<f64>>> {
    let n_t = cf.times().len();
    Ok(match uobs {
        Observations::Zero => vec![vec![0.0; n_t]; cf.n_feet()],
        // observations solve the K = 0 model, so they are constant on its curves
        Observations::Free(f0) => sample_grid(f0, cf.feet())?
            .into_iter()
            .map(|v| vec![v; n_t])
            .collect(),
        Observations::Sampled(tr) => (0..cf.n_feet())
            .map(|j| {
                (0..n_t)
                    .map(|i| tr.value_at(cf.times()[i], cf.lifted(j)[i]))
                    .collect()
            })
            .collect(),
    })
}

/// Linear transport BFN sweep along the curves of `a(x)`:
/// `dw/ds = -K(psi) w` forward, `dw/ds = +K'(psi) w` for the backward system,
/// the latter integrated from `t = T` down to `t = 0`. Each step applies the
/// exact integrating factor of the (piecewise constant) gain on the step.
pub fn solve_inviscid_linear(
    spec: &EquationSpec,
    gain: &Gain,
    sweep: Sweep,
    boundary: &BoundaryData,
    uobs: &Observations,
    cf: &CharField,
) -> Result<CharacteristicRun> {
    if spec.class() != EquationClass::InviscidLinear {
        return Err(BfnError::InvalidSpec(
            "characteristic linear solver needs the inviscid linear equation".into(),
        ));
    }
    if (cf.t_start()).abs() > 0.0 || (cf.t_end() - spec.t_final()).abs() > 1e-12 * spec.t_final() {
        return Err(BfnError::InvalidArgument(
            "curves must span [0, T] of the equation".into(),
        ));
    }
    let n_t = cf.times().len();
    let obs = observations_along(uobs, cf)?;
    let start: Vec<f64> = match (sweep, boundary) {
        (Sweep::Forward, BoundaryData::Initial(f)) => sample_grid(f, cf.feet())?,
        (Sweep::Backward, BoundaryData::Final(f)) => {
            let ends: Vec<f64> = (0..cf.n_feet()).map(|j| cf.lifted(j)[n_t - 1]).collect();
            sample_grid(f, &ends)?
        }
        (Sweep::Backward, BoundaryData::FinalCarried { positions, values }) => {
            let matches = positions.len() == cf.n_feet()
                && values.len() == cf.n_feet()
                && positions
                    .iter()
                    .enumerate()
                    .all(|(j, p)| (p - cf.lifted(j)[n_t - 1]).abs() <= 1e-12);
            if !matches {
                return Err(BfnError::InvalidArgument(
                    "carried final values must sit on the ends of these curves".into(),
                ));
            }
            values.clone()
        }
        _ => {
            return Err(BfnError::InvalidArgument(
                "forward sweeps start from initial data, backward sweeps from final data".into(),
            ))
        }
    };
    let kappa = gain.kappa();
    let errors: Vec<Vec<f64>> = (0..cf.n_feet())
        .into_par_iter()
        .map(|j| {
            let mut w = vec![0.0; n_t];
            match sweep {
                Sweep::Forward => {
                    w[0] = start[j] - obs[j][0];
                    for i in 0..n_t - 1 {
                        let k = cf.integrate_gain(gain, j, cf.times()[i], cf.times()[i + 1]);
                        w[i + 1] = w[i] * (-k).exp();
                    }
                }
                Sweep::Backward => {
                    w[n_t - 1] = start[j] - obs[j][n_t - 1];
                    for i in (0..n_t - 1).rev() {
                        let k = cf.integrate_gain(gain, j, cf.times()[i], cf.times()[i + 1]);
                        w[i] = w[i + 1] * (-kappa * k).exp();
                    }
                }
            }
            w
        })
        .collect();
    let carried: Vec<Vec<f64>> = errors
        .iter()
        .zip(&obs)
        .map(|(w, o)| w.iter().zip(o).map(|(a, b)| a + b).collect())
        .collect();
    let trajectory = grid_trajectory(spec, cf, &carried)?;
    let chars = cf.clone().with_carried(carried)?;
    Ok(CharacteristicRun {
        trajectory,
        chars,
        errors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid1D;
    use std::f64::consts::PI;

    fn nodes(n: usize) -> Vec<f64> {
        Grid1D::periodic(n).unwrap().nodes()
    }

    #[test]
    fn unit_speed_is_exact() {
        let feet = nodes(16);
        let cf = trace(&Velocity::Profile(vec![1.0; 16]), &feet, 1.0, 10).unwrap();
        for (i, &t) in cf.times().iter().enumerate() {
            for (j, &x) in feet.iter().enumerate() {
                assert!((cf.lifted(j)[i] - (x + t)).abs() < 1e-14);
            }
        }
        let still = trace(&Velocity::Profile(vec![0.0; 16]), &feet, 1.0, 10).unwrap();
        assert_eq!(still.positions_at(10), feet);
    }

    #[test]
    fn chi_for_half_support() {
        let g = Gain::spatial(1.0, 1.0, 0.0, 0.5).unwrap();
        let feet = nodes(64);
        let cf = trace(&Velocity::Profile(vec![1.0; 64]), &feet, 1.0, 40).unwrap();
        for c in chi(&g, &cf) {
            assert!((c - 0.5).abs() < 1e-12);
        }
        let short = trace(&Velocity::Profile(vec![1.0; 64]), &feet, 0.25, 10).unwrap();
        let c = chi(&g, &short);
        assert!(c[48].abs() < 1e-12, "foot 0.75: {}", c[48]);
        let cert = observability_certificate(&g, &short, 1.0);
        assert!(!cert.observable && cert.k_threshold.is_infinite());
    }

    #[test]
    fn crossing_is_reported() {
        // converging flow: a(x) = -sin(2 pi x) pulls everything towards x = 0.5
        let n = 32;
        let a: Vec<f64> = nodes(n).iter().map(|x| -20.0 * (2.0 * PI * x).sin()).collect();
        let feet = nodes(n);
        let r = trace(&Velocity::Profile(a), &feet, 5.0, 50);
        assert!(matches!(r, Err(BfnError::Crossing { .. })));
    }

    #[test]
    fn shock_time_of_sine() {
        let g = Grid1D::periodic(512).unwrap();
        let u0 = Field::from_fn(g, 0.0, |x| 0.2 * (2.0 * PI * x).sin());
        let want = 1.0 / (2.0 * PI * 0.2);
        assert!((shock_time(&u0) / want - 1.0).abs() < 0.02);
        assert!(shock_time(&Field::from_fn(g, 0.0, |_| 3.0)).is_infinite());
    }
}
