//! Cubic Hermite pieces of characteristic curves, and the exact time a piece
//! spends inside a gain's spatial support.

use crate::gain::{Support, Window};

/// One time step of a curve `X(t)` on the lifted (unwrapped) line, interpolated
/// by the cubic Hermite polynomial through positions and velocities at both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathSegment {
    pub t0: f64,
    pub t1: f64,
    pub p0: f64,
    pub p1: f64,
    pub v0: f64,
    pub v1: f64,
}

impl PathSegment {
    pub fn new(t0: f64, t1: f64, p0: f64, p1: f64, v0: f64, v1: f64) -> Self {
        Self {
            t0,
            t1,
            p0,
            p1,
            v0,
            v1,
        }
    }

    /// Straight segment; the Hermite cubic degenerates to the chord.
    pub fn linear(t0: f64, t1: f64, p0: f64, p1: f64) -> Self {
        let v = if t1 > t0 { (p1 - p0) / (t1 - t0) } else { 0.0 };
        Self::new(t0, t1, p0, p1, v, v)
    }

    fn coeffs(&self) -> [f64; 4] {
        let h = self.t1 - self.t0;
        let (p0, p1) = (self.p0, self.p1);
        let (m0, m1) = (h * self.v0, h * self.v1);
        let a = 2.0 * p0 + m0 - 2.0 * p1 + m1;
        let b = -3.0 * p0 - 2.0 * m0 + 3.0 * p1 - m1;
        [a, b, m0, p0]
    }

    /// Position at local parameter `theta` in [0, 1].
    pub fn position(&self, theta: f64) -> f64 {
        if theta <= 0.0 {
            return self.p0;
        }
        if theta >= 1.0 {
            return self.p1;
        }
        let [a, b, c, d] = self.coeffs();
        ((a * theta + b) * theta + c) * theta + d
    }

    /// Interior parameters where the cubic changes direction.
    fn turning_points(&self) -> Vec<f64> {
        let [a, b, c, _] = self.coeffs();
        // H'(theta) = 3a theta^2 + 2b theta + c
        let (qa, qb, qc) = (3.0 * a, 2.0 * b, c);
        let scale = qa.abs().max(qb.abs()).max(qc.abs());
        if scale == 0.0 {
            return Vec::new();
        }
        let mut roots = Vec::new();
        if qa.abs() <= 1e-14 * scale {
            if qb != 0.0 {
                roots.push(-qc / qb);
            }
        } else {
            let disc = qb * qb - 4.0 * qa * qc;
            if disc > 0.0 {
                let q = -0.5 * (qb + qb.signum() * disc.sqrt());
                roots.push(q / qa);
                if q != 0.0 {
                    roots.push(qc / q);
                }
            }
        }
        roots.retain(|r| *r > 0.0 && *r < 1.0);
        roots.sort_by(f64::total_cmp);
        roots
    }

    /// Time measure of `{t in [t0, t1] : X(t) in support, t in window}`.
    /// The window is ignored when `None`.
    pub fn measure_inside(&self, support: &Support, window: Option<&Window>) -> f64 {
        let h = self.t1 - self.t0;
        if h <= 0.0 {
            return 0.0;
        }
        let mut breaks = vec![0.0, 1.0];
        if let Some(Window::Interval { t1, t2 }) = window {
            for tb in [*t1, *t2] {
                let th = (tb - self.t0) / h;
                if th > 0.0 && th < 1.0 {
                    breaks.push(th);
                }
            }
        }
        if self.may_cross(support) {
            breaks.extend(self.crossings(support).into_iter().map(|(th, _)| th));
        }
        breaks.sort_by(f64::total_cmp);
        let mut total = 0.0;
        for w in breaks.windows(2) {
            let len = w[1] - w[0];
            if len <= 0.0 {
                continue;
            }
            let mid = 0.5 * (w[0] + w[1]);
            let t_mid = self.t0 + mid * h;
            let in_window = window.is_none_or(|win| win.contains(t_mid));
            if in_window && support.contains(self.position(mid)) {
                total += len;
            }
        }
        total * h
    }

    /// False when the Bézier control hull of the piece contains no lifted
    /// support end, so the piece lies wholly inside or outside.
    fn may_cross(&self, support: &Support) -> bool {
        let Support::Interval { a, b } = *support else {
            return false;
        };
        let h = self.t1 - self.t0;
        let c1 = self.p0 + self.v0 * h / 3.0;
        let c2 = self.p1 - self.v1 * h / 3.0;
        let lo = self.p0.min(self.p1).min(c1).min(c2);
        let hi = self.p0.max(self.p1).max(c1).max(c2);
        let span = |c: f64| (lo - c).floor() != (hi - c).floor() || (lo - c).fract() == 0.0;
        span(a) || span(b)
    }

    /// Parameters in (0, 1) where the curve meets a lifted copy `a + k` or
    /// `b + k` of the support's ends, sorted, with the boundary value met.
    pub fn crossings(&self, support: &Support) -> Vec<(f64, f64)> {
        let Support::Interval { a, b } = *support else {
            return Vec::new();
        };
        let mut out = Vec::new();
        let mut pieces = vec![0.0];
        pieces.extend(self.turning_points());
        pieces.push(1.0);
        for w in pieces.windows(2) {
            let (ta, tb) = (w[0], w[1]);
            let (ya, yb) = (self.position(ta), self.position(tb));
            let (lo, hi) = if ya <= yb { (ya, yb) } else { (yb, ya) };
            let kmin = (lo - b).floor() as i64;
            let kmax = (hi - a).ceil() as i64;
            for k in kmin..=kmax {
                for c in [a + k as f64, b + k as f64] {
                    if c > lo && c < hi {
                        out.push((self.solve_monotone(ta, tb, ya, c), c));
                    }
                }
            }
        }
        out.sort_by(|x, y| x.0.total_cmp(&y.0));
        out
    }

    /// Bisection for `position(theta) = target` on a monotone piece.
    fn solve_monotone(&self, mut lo: f64, mut hi: f64, y_lo: f64, target: f64) -> f64 {
        let below_at_lo = y_lo < target;
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (self.position(mid) < target) == below_at_lo {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const HALF: Support = Support::Interval { a: 0.0, b: 0.5 };

    #[test]
    fn straight_crossing() {
        // x goes from 0.4 to 0.6 over one time unit: inside for half of it
        let s = PathSegment::linear(0.0, 1.0, 0.4, 0.6);
        assert!((s.measure_inside(&HALF, None) - 0.5).abs() < 1e-14);
    }

    #[test]
    fn wrap_around_copy() {
        // lifted 0.9 -> 1.2 enters [1, 1.5]
        let s = PathSegment::linear(0.0, 0.3, 0.9, 1.2);
        assert!((s.measure_inside(&HALF, None) - 0.2).abs() < 1e-14);
    }

    #[test]
    fn window_intersection() {
        let s = PathSegment::linear(0.0, 1.0, 0.0, 0.0);
        let w = Window::Interval { t1: 0.25, t2: 0.6 };
        assert!((s.measure_inside(&HALF, Some(&w)) - 0.35).abs() < 1e-14);
        assert!((s.measure_inside(&Support::Full, Some(&w)) - 0.35).abs() < 1e-14);
    }

    #[test]
    fn turning_curve_enters_and_leaves() {
        // X(t) = 0.45 + t - t^2 on [0, 1]: peaks at 0.7, back to 0.45;
        // outside [0, 0.5] while X > 0.5
        let s = PathSegment::new(0.0, 1.0, 0.45, 0.45, 1.0, -1.0);
        let r = (0.25_f64 - 0.05).sqrt();
        let outside = 2.0 * r;
        assert!((s.measure_inside(&HALF, None) - (1.0 - outside)).abs() < 1e-12);
    }

    #[test]
    fn hermite_reproduces_cubic() {
        let f = |t: f64| 0.1 + 0.3 * t - 0.2 * t * t + 0.05 * t * t * t;
        let df = |t: f64| 0.3 - 0.4 * t + 0.15 * t * t;
        let s = PathSegment::new(0.0, 2.0, f(0.0), f(2.0), df(0.0), df(2.0));
        for k in 0..=10 {
            let th = k as f64 / 10.0;
            assert!((s.position(th) - f(2.0 * th)).abs() < 1e-14);
        }
    }
}
