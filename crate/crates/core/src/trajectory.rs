use serde::{Deserialize, Serialize};

use crate::equation::EquationSpec;
use crate::error::{BfnError, Result};
use crate::field::Field;
use crate::interp::{lerp_interval, lerp_periodic};

/// Uniform time stepping over `[0, T]` with a snapshot stride.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stepping {
    pub nt: usize,
    pub record_every: usize,
}

impl Stepping {
    pub fn new(nt: usize) -> Self {
        Self { nt, record_every: 1 }
    }

    pub fn with_stride(nt: usize, record_every: usize) -> Self {
        Self { nt, record_every }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nt == 0 || self.record_every == 0 {
            return Err(BfnError::InvalidArgument(
                "step count and record stride must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Whether step index `i` (0..=nt) is stored. The last step always is.
    pub fn records(&self, i: usize) -> bool {
        i.is_multiple_of(self.record_every) || i == self.nt
    }

    pub fn time(&self, i: usize, t_final: f64) -> f64 {
        if i == self.nt {
            t_final
        } else {
            t_final * i as f64 / self.nt as f64
        }
    }

    pub fn recorded_times(&self, t_final: f64) -> Vec<f64> {
        (0..=self.nt)
            .filter(|&i| self.records(i))
            .map(|i| self.time(i, t_final))
            .collect()
    }
}

/// Snapshots of a solution at increasing times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    spec: EquationSpec,
    times: Vec<f64>,
    snapshots: Vec<Field>,
}

impl Trajectory {
    pub fn new(spec: EquationSpec, snapshots: Vec<Field>) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(BfnError::InvalidArgument("empty trajectory".into()));
        }
        let grid = spec.grid();
        if snapshots.iter().any(|f| *f.grid() != grid) {
            return Err(BfnError::InvalidArgument(
                "all snapshots must live on the equation's grid".into(),
            ));
        }
        let times: Vec<f64> = snapshots.iter().map(Field::time).collect();
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(BfnError::InvalidArgument("snapshot times must increase".into()));
        }
        Ok(Self {
            spec,
            times,
            snapshots,
        })
    }

    pub fn spec(&self) -> &EquationSpec {
        &self.spec
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn snapshots(&self) -> &[Field] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn initial(&self) -> &Field {
        &self.snapshots[0]
    }

    pub fn last(&self) -> &Field {
        self.snapshots.last().expect("non-empty")
    }

    /// Bracketing snapshot indices and weight for time `t` (clamped).
    fn bracket(&self, t: f64) -> (usize, usize, f64) {
        let n = self.times.len();
        if n == 1 || t <= self.times[0] {
            return (0, 0, 0.0);
        }
        if t >= self.times[n - 1] {
            return (n - 1, n - 1, 0.0);
        }
        let k = self.times.partition_point(|&s| s <= t) - 1;
        let w = (t - self.times[k]) / (self.times[k + 1] - self.times[k]);
        (k, k + 1, w)
    }

    /// Linear-in-time interpolated snapshot.
    pub fn at(&self, t: f64) -> Field {
        let (a, b, w) = self.bracket(t);
        if a == b || w == 0.0 {
            return self.snapshots[a].clone().with_time(t);
        }
        let va = self.snapshots[a].values();
        let vb = self.snapshots[b].values();
        let values = va.iter().zip(vb).map(|(x, y)| x + w * (y - x)).collect();
        Field::from_parts(self.spec.grid(), values, t)
    }

    /// Value at an arbitrary point: linear in time, linear in space.
    pub fn value_at(&self, t: f64, x: f64) -> f64 {
        let (a, b, w) = self.bracket(t);
        let periodic = self.spec.grid().is_periodic();
        let eval = |f: &Field| {
            if periodic {
                lerp_periodic(f.values(), x)
            } else {
                lerp_interval(f.values(), x)
            }
        };
        let fa = eval(&self.snapshots[a]);
        if a == b {
            fa
        } else {
            fa + w * (eval(&self.snapshots[b]) - fa)
        }
    }
}

/// Direction of a BFN sweep. `Backward` integrates the anti-damped system
/// (`+K' (u - u_obs)`) from its final value down to `t = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sweep {
    Forward,
    Backward,
}

/// Observation trajectory fed to the nudging term.
///
/// `Free` means "the unnudged evolution of this initial field under the same
/// model"; each solver evolves it with its own exact or consistent integrator,
/// so observations solve the model by construction.
#[derive(Debug, Clone, PartialEq)]
pub enum Observations {
    Zero,
    Free(Field),
    Sampled(Trajectory),
}

impl Observations {
    pub fn is_zero(&self) -> bool {
        match self {
            Observations::Zero => true,
            Observations::Free(f) => f.values().iter().all(|v| *v == 0.0),
            Observations::Sampled(tr) => tr
                .snapshots()
                .iter()
                .all(|f| f.values().iter().all(|v| *v == 0.0)),
        }
    }

    pub fn initial(&self, grid: crate::grid::Grid1D) -> Field {
        match self {
            Observations::Zero => Field::zeros(grid, 0.0),
            Observations::Free(f) => f.clone(),
            Observations::Sampled(tr) => tr.initial().clone(),
        }
    }
}
