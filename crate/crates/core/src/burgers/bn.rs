//! Fourier coefficients of the final condition a one-step viscous Bürgers BFN
//! would need, to first order in the initial perturbation:
//!
//! `b_n = e^{(K - K')T} (e^{-2(K + K')T} - 1) sum_{p+q=n} a_p a_q (e^{T D} - 1) / D`,
//! `D = 2K' + K + 2 nu p q`,
//!
//! and the companion `b_n` with `e^{T D}` in place of `e^{T D} - 1`. Both are
//! kept as log-magnitude and phase; the magnitudes reach `e^{nu n^2 T / 2}`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{BfnError, Result};

/// A complex number stored as `exp(ln_abs + i arg)`; zero has `ln_abs = -inf`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogComplex {
    pub ln_abs: f64,
    pub arg: f64,
}

impl LogComplex {
    pub const ZERO: LogComplex = LogComplex {
        ln_abs: f64::NEG_INFINITY,
        arg: 0.0,
    };

    pub fn from_complex(z: Complex64) -> Self {
        if z.norm() == 0.0 {
            Self::ZERO
        } else {
            Self {
                ln_abs: z.norm().ln(),
                arg: z.arg(),
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.ln_abs == f64::NEG_INFINITY
    }

    pub fn log10_abs(&self) -> f64 {
        self.ln_abs / std::f64::consts::LN_10
    }

    /// Plain value; overflows to infinity for large magnitudes.
    pub fn to_complex(&self) -> Complex64 {
        Complex64::from_polar(self.ln_abs.exp(), self.arg)
    }

    fn mul(self, other: LogComplex) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::ZERO;
        }
        Self {
            ln_abs: self.ln_abs + other.ln_abs,
            arg: self.arg + other.arg,
        }
    }

    /// Sum by factoring out the largest magnitude.
    fn sum(terms: &[LogComplex]) -> Self {
        let top = terms.iter().map(|t| t.ln_abs).fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return Self::ZERO;
        }
        let z: Complex64 = terms
            .iter()
            .filter(|t| !t.is_zero())
            .map(|t| Complex64::from_polar((t.ln_abs - top).exp(), t.arg))
            .sum();
        if z.norm() == 0.0 {
            return Self::ZERO;
        }
        Self {
            ln_abs: top + z.norm().ln(),
            arg: z.arg(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BnParams {
    pub k: f64,
    pub kp: f64,
    pub nu: f64,
    pub t: f64,
}

/// The sequences for n = 1..N (index `n - 1`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BnSequence {
    pub params: BnParams,
    pub a: Vec<Complex64>,
    pub b: Vec<LogComplex>,
    pub b_under: Vec<LogComplex>,
}

/// How the companion sequence grows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GrowthVerdict {
    /// All coefficients vanish (`K = K' = 0`).
    WellPosedBoundary,
    /// `max_n ln|b_n| / n^2` reaches `0.4 nu T`.
    SuperPolynomial,
    Polynomial,
}

impl std::fmt::Display for GrowthVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GrowthVerdict::WellPosedBoundary => "well-posed boundary case",
            GrowthVerdict::SuperPolynomial => "super-polynomial",
            GrowthVerdict::Polynomial => "polynomial",
        })
    }
}

/// Fraction of `nu T` the growth diagnostic must reach to count as super-polynomial.
pub const GROWTH_THRESHOLD: f64 = 0.4;

impl BnSequence {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    /// `g_n = ln|b_n| / n^2` of the companion sequence for n >= 2, `None` where it vanishes.
    pub fn growth(&self) -> Vec<(usize, Option<f64>)> {
        (2..=self.len())
            .map(|n| {
                let b = self.b_under[n - 1];
                (n, (!b.is_zero()).then(|| b.ln_abs / (n * n) as f64))
            })
            .collect()
    }

    pub fn max_growth(&self) -> Option<f64> {
        self.growth()
            .into_iter()
            .filter_map(|(_, g)| g)
            .fold(None, |m, g| Some(m.map_or(g, |m: f64| m.max(g))))
    }

    pub fn all_zero(&self) -> bool {
        self.b.iter().all(LogComplex::is_zero)
    }

    pub fn verdict(&self) -> GrowthVerdict {
        if self.all_zero() {
            return GrowthVerdict::WellPosedBoundary;
        }
        let scale = self.params.nu * self.params.t;
        match self.max_growth() {
            Some(g) if scale > 0.0 && g >= GROWTH_THRESHOLD * scale => GrowthVerdict::SuperPolynomial,
            _ => GrowthVerdict::Polynomial,
        }
    }
}

/// `ln((e^{T D} - 1) / D)`, with the limit `ln T` at `D = 0`.
fn ln_expm1_ratio(t: f64, d: f64) -> f64 {
    let x = t * d;
    if d == 0.0 {
        t.ln()
    } else if x > 1.0 {
        x + (-(-x).exp_m1()).ln() - d.ln()
    } else {
        (x.exp_m1() / d).ln()
    }
}

/// Computes both sequences for coefficients `a_1..a_N`.
pub fn bn_sequence(a: &[Complex64], k: f64, kp: f64, nu: f64, t: f64) -> Result<BnSequence> {
    for (name, v) in [("K", k), ("K'", kp), ("nu", nu)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(BfnError::InvalidArgument(format!("{name} must be >= 0, got {v}")));
        }
    }
    if !(t.is_finite() && t > 0.0) {
        return Err(BfnError::InvalidArgument(format!("T must be positive, got {t}")));
    }
    if a.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
        return Err(BfnError::InvalidArgument("coefficients must be finite".into()));
    }
    let params = BnParams { k, kp, nu, t };
    let n_max = a.len();
    let sum_rate = k + kp;
    if sum_rate == 0.0 {
        return Ok(BnSequence {
            params,
            a: a.to_vec(),
            b: vec![LogComplex::ZERO; n_max],
            b_under: vec![LogComplex::ZERO; n_max],
        });
    }
    // e^{-2(K+K')T} - 1 is negative
    let ln_common = (-(-2.0 * sum_rate * t).exp_m1()).ln();
    let common = LogComplex {
        ln_abs: ln_common,
        arg: std::f64::consts::PI,
    };
    let shift = LogComplex {
        ln_abs: (k - kp) * t,
        arg: 0.0,
    };
    let la: Vec<LogComplex> = a.iter().map(|&z| LogComplex::from_complex(z)).collect();
    let (b, b_under): (Vec<LogComplex>, Vec<LogComplex>) = (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let mut with_minus = Vec::with_capacity(n);
            let mut plain = Vec::with_capacity(n);
            for p in 1..n {
                let q = n - p;
                let prod = la[p - 1].mul(la[q - 1]);
                if prod.is_zero() {
                    continue;
                }
                let d = 2.0 * kp + k + 2.0 * nu * (p * q) as f64;
                with_minus.push(prod.mul(LogComplex {
                    ln_abs: ln_expm1_ratio(t, d),
                    arg: 0.0,
                }));
                plain.push(prod.mul(LogComplex {
                    ln_abs: t * d - d.ln(),
                    arg: 0.0,
                }));
            }
            let s = LogComplex::sum(&with_minus);
            let s_under = LogComplex::sum(&plain);
            (shift.mul(common).mul(s), common.mul(s_under))
        })
        .unzip();
    Ok(BnSequence {
        params,
        a: a.to_vec(),
        b,
        b_under,
    })
}

/// `a_n = n^{-2}`, the reference input.
pub fn inverse_square_coefficients(n_max: usize) -> Vec<Complex64> {
    (1..=n_max)
        .map(|n| Complex64::new(1.0 / (n * n) as f64, 0.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn no_nudging_means_no_coefficients() {
        let s = bn_sequence(&inverse_square_coefficients(16), 0.0, 0.0, 1.0, 1.0).unwrap();
        assert!(s.all_zero());
        assert_eq!(s.verdict(), GrowthVerdict::WellPosedBoundary);
    }

    #[test]
    fn two_term_case_by_hand() {
        let (k, kp, nu, t) = (0.7, 1.3, 0.2, 0.9);
        let a1 = Complex64::new(0.5, -0.25);
        let s = bn_sequence(&[a1, Complex64::new(0.1, 0.0)], k, kp, nu, t).unwrap();
        let d = 2.0 * kp + k + 2.0 * nu;
        let want = ((k - kp) * t).exp()
            * ((-2.0 * (k + kp) * t).exp() - 1.0)
            * a1
            * a1
            * (((2.0 * kp + k + 2.0 * nu) * t).exp() - 1.0)
            / d;
        let got = s.b[1].to_complex();
        assert!((got - want).norm() <= 1e-12 * want.norm(), "{got} vs {want}");
        assert!(s.b[0].is_zero());
    }

    #[test]
    fn viscous_growth_is_super_polynomial() {
        let s = bn_sequence(&inverse_square_coefficients(128), 1.0, 1.0, 1.0, 1.0).unwrap();
        assert!(s.max_growth().unwrap() >= 0.4);
        assert_eq!(s.verdict(), GrowthVerdict::SuperPolynomial);
        assert!(s.b_under.iter().all(|b| b.ln_abs.is_finite() || b.is_zero()));
    }
}
