use serde::{Deserialize, Serialize};

use crate::error::{BfnError, Result};
use crate::path::PathSegment;

/// Spatial support of the nudging gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Support {
    Full,
    Interval { a: f64, b: f64 },
}

/// Temporal activation window of the nudging gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Window {
    Full,
    Interval { t1: f64, t2: f64 },
}

impl Support {
    /// Membership on the torus: `x` is in the support iff some integer shift
    /// of it lands in the closed interval `[a, b]`.
    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Support::Full => true,
            Support::Interval { a, b } => {
                if (0.0..=1.0).contains(&x) && a <= x && x <= b {
                    return true;
                }
                let y = x.rem_euclid(1.0);
                (a <= y && y <= b) || (a <= y + 1.0 && y + 1.0 <= b)
            }
        }
    }

    pub fn is_full(&self) -> bool {
        matches!(self, Support::Full)
    }
}

impl Window {
    pub fn contains(&self, t: f64) -> bool {
        match *self {
            Window::Full => true,
            Window::Interval { t1, t2 } => t1 <= t && t <= t2,
        }
    }

    /// Length of `[from, to]` covered by the window.
    pub fn overlap(&self, from: f64, to: f64) -> f64 {
        match *self {
            Window::Full => (to - from).max(0.0),
            Window::Interval { t1, t2 } => (to.min(t2) - from.max(t1)).max(0.0),
        }
    }
}

/// Nudging gain `K(t, x) = K * 1_window(t) * 1_support(x)` with backward
/// partner `K' = kappa * K`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gain {
    amplitude: f64,
    kappa: f64,
    support: Support,
    window: Window,
}

impl Gain {
    pub fn new(amplitude: f64, kappa: f64, support: Support, window: Window) -> Result<Self> {
        if !(amplitude.is_finite() && amplitude >= 0.0) {
            return Err(BfnError::InvalidGain(format!(
                "amplitude must be finite and nonnegative, got {amplitude}"
            )));
        }
        if !(kappa.is_finite() && kappa > 0.0) {
            return Err(BfnError::InvalidGain(format!(
                "kappa must be finite and positive, got {kappa}"
            )));
        }
        if let Support::Interval { a, b } = support {
            if !(0.0 <= a && a < b && b <= 1.0) {
                return Err(BfnError::InvalidGain(format!(
                    "support [{a}, {b}] is not a non-empty subinterval of [0, 1]"
                )));
            }
        }
        if let Window::Interval { t1, t2 } = window {
            if !(t1.is_finite() && t2.is_finite() && 0.0 <= t1 && t1 < t2) {
                return Err(BfnError::InvalidGain(format!(
                    "window [{t1}, {t2}] must satisfy 0 <= t1 < t2"
                )));
            }
        }
        Ok(Self {
            amplitude,
            kappa,
            support,
            window,
        })
    }

    /// Constant gain active everywhere, all the time.
    pub fn constant(amplitude: f64, kappa: f64) -> Result<Self> {
        Self::new(amplitude, kappa, Support::Full, Window::Full)
    }

    pub fn windowed(amplitude: f64, kappa: f64, t1: f64, t2: f64) -> Result<Self> {
        Self::new(amplitude, kappa, Support::Full, Window::Interval { t1, t2 })
    }

    pub fn spatial(amplitude: f64, kappa: f64, a: f64, b: f64) -> Result<Self> {
        Self::new(amplitude, kappa, Support::Interval { a, b }, Window::Full)
    }

    pub fn zero() -> Self {
        Self {
            amplitude: 0.0,
            kappa: 1.0,
            support: Support::Full,
            window: Window::Full,
        }
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn support(&self) -> Support {
        self.support
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Result<Self> {
        Self::new(amplitude, self.kappa, self.support, self.window)
    }

    pub fn with_kappa(&self, kappa: f64) -> Result<Self> {
        Self::new(self.amplitude, kappa, self.support, self.window)
    }

    pub fn with_support(&self, support: Support) -> Result<Self> {
        Self::new(self.amplitude, self.kappa, support, self.window)
    }

    pub fn evaluate(&self, t: f64, x: f64) -> f64 {
        if self.window.contains(t) && self.support.contains(x) {
            self.amplitude
        } else {
            0.0
        }
    }

    pub fn evaluate_backward(&self, t: f64, x: f64) -> f64 {
        self.kappa * self.evaluate(t, x)
    }

    /// True when the gain does not depend on x (constant or temporal window).
    pub fn is_spatially_uniform(&self) -> bool {
        self.support.is_full()
    }

    /// `K * |[from, to] ∩ window|`: the time integral of a spatially uniform gain.
    pub fn temporal_exposure(&self, from: f64, to: f64) -> f64 {
        self.amplitude * self.window.overlap(from, to)
    }

    /// Exact time integral of `K(t, X(t))` along a curve segment.
    pub fn exposure(&self, seg: &PathSegment) -> f64 {
        if self.amplitude == 0.0 {
            return 0.0;
        }
        self.amplitude * seg.measure_inside(&self.support, Some(&self.window))
    }

    /// Time the segment spends inside the spatial support, ignoring the window.
    pub fn occupation(&self, seg: &PathSegment) -> f64 {
        seg.measure_inside(&self.support, None)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation_is_sharp() {
        let g = Gain::new(
            2.0,
            0.5,
            Support::Interval { a: 0.0, b: 0.5 },
            Window::Interval { t1: 0.25, t2: 0.75 },
        )
        .unwrap();
        assert_eq!(g.evaluate(0.5, 0.25), 2.0);
        assert_eq!(g.evaluate(0.5, 0.5), 2.0);
        assert_eq!(g.evaluate(0.5, 0.5000001), 0.0);
        assert_eq!(g.evaluate(0.2, 0.25), 0.0);
        assert_eq!(g.evaluate_backward(0.5, 0.25), 1.0);
    }

    #[test]
    fn torus_membership() {
        let s = Support::Interval { a: 0.5, b: 1.0 };
        assert!(s.contains(0.0));
        assert!(s.contains(1.75));
        assert!(!s.contains(1.25));
        assert!(s.contains(-0.25));
    }

    #[test]
    fn validation() {
        assert!(Gain::constant(-1.0, 1.0).is_err());
        assert!(Gain::constant(1.0, 0.0).is_err());
        assert!(Gain::spatial(1.0, 1.0, 0.6, 0.4).is_err());
        assert!(Gain::windowed(1.0, 1.0, 0.5, 0.5).is_err());
    }

    #[test]
    fn window_overlap() {
        let w = Window::Interval { t1: 0.25, t2: 0.75 };
        assert_eq!(w.overlap(0.0, 1.0), 0.5);
        assert_eq!(w.overlap(0.5, 1.0), 0.25);
        assert_eq!(w.overlap(0.8, 1.0), 0.0);
    }
}
