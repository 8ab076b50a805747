use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{BfnError, Result};
use crate::grid::{BoundaryKind, Grid1D};

/// A snapshot of a scalar function on a grid at time `time`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Field {
    grid: Grid1D,
    values: Vec<f64>,
    time: f64,
}

impl Field {
    /// Validating constructor: lengths match, values finite, and Dirichlet
    /// endpoints are exactly zero.
    pub fn new(grid: Grid1D, values: Vec<f64>, time: f64) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(BfnError::InvalidField(format!(
                "expected {} values, got {}",
                grid.n(),
                values.len()
            )));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(BfnError::InvalidField(format!("non-finite value at node {j}")));
        }
        if grid.bc() == BoundaryKind::Dirichlet
            && (values[0] != 0.0 || values[grid.n() - 1] != 0.0)
        {
            return Err(BfnError::InvalidField(
                "Dirichlet field must vanish at both endpoints".into(),
            ));
        }
        if !time.is_finite() {
            return Err(BfnError::InvalidField("non-finite time tag".into()));
        }
        Ok(Self { grid, values, time })
    }

    pub fn zeros(grid: Grid1D, time: f64) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n()],
            time,
        }
    }

    /// Samples `f` at the nodes. Dirichlet endpoints are pinned to zero so
    /// that e.g. `sin(pi x)` at `x = 1` does not leak rounding noise.
    pub fn from_fn(grid: Grid1D, time: f64, f: impl Fn(f64) -> f64) -> Self {
        let mut values: Vec<f64> = grid.nodes().into_iter().map(f).collect();
        if grid.bc() == BoundaryKind::Dirichlet {
            values[0] = 0.0;
            let last = grid.n() - 1;
            values[last] = 0.0;
        }
        Self { grid, values, time }
    }

    /// Crate-internal constructor for values produced by solvers that
    /// maintain the invariants themselves.
    pub(crate) fn from_parts(grid: Grid1D, mut values: Vec<f64>, time: f64) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        if grid.bc() == BoundaryKind::Dirichlet {
            values[0] = 0.0;
            let last = grid.n() - 1;
            values[last] = 0.0;
        }
        Self { grid, values, time }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn with_time(mut self, time: f64) -> Self {
        self.time = time;
        self
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| s * v).collect(),
            time: self.time,
        }
    }

    fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(BfnError::InvalidField("fields live on different grids".into()));
        }
        Ok(())
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a - b)
                .collect(),
            time: self.time,
        })
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
            time: self.time,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

/// Discrete L2 norm `sqrt(dx * sum f_j^2)`.
pub fn l2_norm(f: &Field) -> f64 {
    let dx = f.grid().spacing();
    (dx * f.values().iter().map(|v| v * v).sum::<f64>()).sqrt()
}

/// Centered finite-difference slope at every node: wrap-around on periodic
/// grids, second-order one-sided at the ends otherwise.
pub fn slopes(f: &Field) -> Vec<f64> {
    let v = f.values();
    let n = v.len();
    let h = f.grid().spacing();
    if f.grid().is_periodic() {
        (0..n)
            .map(|j| (v[(j + 1) % n] - v[(j + n - 1) % n]) / (2.0 * h))
            .collect()
    } else {
        (0..n)
            .map(|j| {
                if j == 0 {
                    (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
                } else if j == n - 1 {
                    (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h)
                } else {
                    (v[j + 1] - v[j - 1]) / (2.0 * h)
                }
            })
            .collect()
    }
}

/// Max-norm of the finite-difference slope; the estimator of the bound `M`
/// on `|d/dx u_obs|`.
pub fn linf_grad(f: &Field) -> f64 {
    slopes(f).into_iter().fold(0.0_f64, |m, s| m.max(s.abs()))
}

/// Named analytic profiles used for initial data and observations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Zero,
    /// `amplitude * sin(mode * pi * x)`, vanishing at both ends.
    SinPi { amplitude: f64, mode: u32 },
    /// `amplitude * sin(2 pi wavenumber x + phase)`, 1-periodic.
    Sin2Pi {
        amplitude: f64,
        phase: f64,
        wavenumber: u32,
    },
}

impl Profile {
    pub fn sin_pi(amplitude: f64) -> Self {
        Profile::SinPi { amplitude, mode: 1 }
    }

    pub fn sin_2pi(amplitude: f64) -> Self {
        Profile::Sin2Pi {
            amplitude,
            phase: 0.0,
            wavenumber: 1,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::SinPi { amplitude, mode } => amplitude * (mode as f64 * PI * x).sin(),
            Profile::Sin2Pi {
                amplitude,
                phase,
                wavenumber,
            } => amplitude * (2.0 * PI * wavenumber as f64 * x + phase).sin(),
        }
    }

    pub fn sample(&self, grid: Grid1D) -> Field {
        Field::from_fn(grid, 0.0, |x| self.eval(x))
    }

    /// Parses `zero`, `sin_pi <amp> [mode]` or `sin_2pi <amp> [phase] [wavenumber]`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let name = parts
            .next()
            .ok_or_else(|| BfnError::Config("empty profile".into()))?;
        let nums: Vec<f64> = parts
            .map(|p| {
                p.parse::<f64>()
                    .map_err(|_| BfnError::Config(format!("bad number '{p}' in profile '{s}'")))
            })
            .collect::<Result<_>>()?;
        let wave = |v: Option<&f64>| -> Result<u32> {
            match v {
                None => Ok(1),
                Some(&w) if w >= 1.0 && w.fract() == 0.0 => Ok(w as u32),
                Some(w) => Err(BfnError::Config(format!("mode must be a positive integer, got {w}"))),
            }
        };
        match name {
            "zero" if nums.is_empty() => Ok(Profile::Zero),
            "sin_pi" if (1..=2).contains(&nums.len()) => Ok(Profile::SinPi {
                amplitude: nums[0],
                mode: wave(nums.get(1))?,
            }),
            "sin_2pi" if (1..=3).contains(&nums.len()) => Ok(Profile::Sin2Pi {
                amplitude: nums[0],
                phase: nums.get(1).copied().unwrap_or(0.0),
                wavenumber: wave(nums.get(2))?,
            }),
            _ => Err(BfnError::Config(format!("unknown profile '{s}'"))),
        }
    }
}

impl std::fmt::Display for Profile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match *self {
            Profile::Zero => write!(f, "zero"),
            Profile::SinPi { amplitude, mode } => write!(f, "sin_pi {amplitude} {mode}"),
            Profile::Sin2Pi {
                amplitude,
                phase,
                wavenumber,
            } => write!(f, "sin_2pi {amplitude} {phase} {wavenumber}"),
        }
    }
}
