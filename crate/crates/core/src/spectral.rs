//! Modal representations on uniform grids: sine series for Dirichlet
//! fields, cosine series for Neumann fields, Fourier series for periodic ones.
//! All transforms are exact on the grid (discrete orthogonality).

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::field::Field;
use crate::grid::{BoundaryKind, Grid1D};

/// DST-I on `m` interior values: `f_j = sum_{k=1..m} c_k sin(k pi j / (m + 1))`.
pub struct SineTransform {
    m: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl SineTransform {
    pub fn new(m: usize) -> Self {
        let fft = FftPlanner::new().plan_fft_forward(2 * (m + 1));
        Self { m, fft }
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    /// `sum_j x_j sin(pi j k / (m + 1))` for k = 1..m.
    fn raw(&self, x: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut buf = vec![Complex64::new(0.0, 0.0); 2 * (m + 1)];
        for j in 0..m {
            buf[j + 1] = Complex64::new(x[j], 0.0);
            buf[2 * (m + 1) - 1 - j] = Complex64::new(-x[j], 0.0);
        }
        self.fft.process(&mut buf);
        (1..=m).map(|k| -0.5 * buf[k].im).collect()
    }

    /// Interior node values to sine coefficients.
    pub fn analyze(&self, interior: &[f64]) -> Vec<f64> {
        let s = 2.0 / (self.m + 1) as f64;
        self.raw(interior).into_iter().map(|v| s * v).collect()
    }

    /// Sine coefficients to interior node values.
    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        self.raw(coeffs)
    }
}

/// DCT-I on `n = N + 1` nodes including both endpoints:
/// `f_j = c_0/2 + sum_{k=1..N-1} c_k cos(k pi j / N) + (-1)^j c_N / 2`.
pub struct CosineTransform {
    big_n: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl CosineTransform {
    pub fn new(n_nodes: usize) -> Self {
        let big_n = n_nodes - 1;
        let fft = FftPlanner::new().plan_fft_forward(2 * big_n);
        Self { big_n, fft }
    }

    fn raw(&self, x: &[f64]) -> Vec<f64> {
        let nn = self.big_n;
        let mut buf = vec![Complex64::new(0.0, 0.0); 2 * nn];
        for j in 0..=nn {
            buf[j] = Complex64::new(x[j], 0.0);
        }
        for j in 1..nn {
            buf[2 * nn - j] = Complex64::new(x[j], 0.0);
        }
        self.fft.process(&mut buf);
        (0..=nn).map(|k| buf[k].re).collect()
    }

    pub fn analyze(&self, values: &[f64]) -> Vec<f64> {
        let s = 1.0 / self.big_n as f64;
        self.raw(values).into_iter().map(|v| s * v).collect()
    }

    pub fn synthesize(&self, coeffs: &[f64]) -> Vec<f64> {
        self.raw(coeffs).into_iter().map(|v| 0.5 * v).collect()
    }

    /// Exact x-derivative of the cosine series at the nodes, for a series
    /// on [0, 1] (`cos(k pi x)`).
    pub fn derivative_at_nodes(&self, coeffs: &[f64]) -> Vec<f64> {
        // d/dx cos(k pi x) = -k pi sin(k pi x); the endpoint terms vanish at nodes
        let nn = self.big_n;
        let m = nn - 1;
        let sine = SineTransform::new(m);
        let b: Vec<f64> = (1..=m).map(|k| -(k as f64) * PI * coeffs[k]).collect();
        let interior = sine.synthesize(&b);
        let mut out = vec![0.0; nn + 1];
        out[1..=m].copy_from_slice(&interior);
        out
    }
}

/// Coefficients of a field in the eigenbasis matching its boundary kind.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "basis", content = "coeffs", rename_all = "snake_case")]
pub enum ModalRepr {
    /// Coefficient `k - 1` multiplies `sin(k pi x)`, k = 1..n-2.
    Sine(Vec<f64>),
    /// Coefficient `k` multiplies `cos(k pi x)` (endpoint modes halved).
    Cosine(Vec<f64>),
    /// Unnormalized DFT: coefficient `k` multiplies `exp(2 pi i k x) / n`.
    Fourier(Vec<Complex64>),
}

impl ModalRepr {
    pub fn from_field(f: &Field) -> Self {
        let v = f.values();
        let n = v.len();
        match f.grid().bc() {
            BoundaryKind::Dirichlet => ModalRepr::Sine(SineTransform::new(n - 2).analyze(&v[1..n - 1])),
            BoundaryKind::Neumann => ModalRepr::Cosine(CosineTransform::new(n).analyze(v)),
            BoundaryKind::Periodic => {
                let mut buf: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
                FftPlanner::new().plan_fft_forward(n).process(&mut buf);
                ModalRepr::Fourier(buf)
            }
        }
    }

    pub fn n_modes(&self) -> usize {
        match self {
            ModalRepr::Sine(c) | ModalRepr::Cosine(c) => c.len(),
            ModalRepr::Fourier(c) => c.len(),
        }
    }

    /// Back to node values on `grid`, which must match the basis.
    pub fn to_field(&self, grid: Grid1D, time: f64) -> Field {
        let n = grid.n();
        let values = match self {
            ModalRepr::Sine(c) => {
                assert_eq!(grid.bc(), BoundaryKind::Dirichlet);
                let mut out = vec![0.0; n];
                out[1..n - 1].copy_from_slice(&SineTransform::new(n - 2).synthesize(c));
                out
            }
            ModalRepr::Cosine(c) => {
                assert_eq!(grid.bc(), BoundaryKind::Neumann);
                CosineTransform::new(n).synthesize(c)
            }
            ModalRepr::Fourier(c) => {
                assert_eq!(grid.bc(), BoundaryKind::Periodic);
                let mut buf = c.clone();
                FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
                buf.into_iter().map(|z| z.re / n as f64).collect()
            }
        };
        Field::from_parts(grid, values, time)
    }
}

/// Sparse real trigonometric interpolant of periodic samples,
/// `f(x) = sum_k a_k cos(2 pi k x) + b_k sin(2 pi k x)`, with negligible
/// modes dropped. Gives spectrally accurate values and slopes anywhere.
#[derive(Debug, Clone, PartialEq)]
pub struct TrigSeries {
    terms: Vec<(f64, f64, f64)>,
}

impl TrigSeries {
    pub fn from_field(f: &Field) -> Self {
        assert!(f.grid().is_periodic(), "trigonometric series need a periodic field");
        let n = f.grid().n();
        let ModalRepr::Fourier(c) = ModalRepr::from_field(f) else {
            unreachable!()
        };
        let scale = c.iter().fold(0.0_f64, |m, z| m.max(z.norm()));
        let cutoff = 1e-15 * scale.max(f64::MIN_POSITIVE);
        let mut terms = Vec::new();
        for (k, &z) in c.iter().enumerate().take(n / 2 + 1) {
            if z.norm() <= cutoff {
                continue;
            }
            // Nyquist and mean are not doubled
            let w = if k == 0 || 2 * k == n { 1.0 } else { 2.0 } / n as f64;
            terms.push((2.0 * PI * k as f64, w * z.re, -w * z.im));
        }
        Self { terms }
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(w, a, b)| {
                let (s, c) = (w * x).sin_cos();
                a * c + b * s
            })
            .sum()
    }

    /// Value and slope with one `sin_cos` per term.
    pub fn eval_with_slope(&self, x: f64) -> (f64, f64) {
        self.terms.iter().fold((0.0, 0.0), |(f, d), &(w, a, b)| {
            let (s, c) = (w * x).sin_cos();
            (f + a * c + b * s, d + w * (b * c - a * s))
        })
    }

    pub fn slope(&self, x: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(w, a, b)| {
                let (s, c) = (w * x).sin_cos();
                w * (b * c - a * s)
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_round_trip() {
        let g = Grid1D::dirichlet(37).unwrap();
        let f = Field::from_fn(g, 0.0, |x| x * (1.0 - x) * (5.0 * x).exp());
        let back = ModalRepr::from_field(&f).to_field(g, 0.0);
        let scale = f.max_abs();
        for (a, b) in f.values().iter().zip(back.values()) {
            assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn sine_picks_single_mode() {
        let g = Grid1D::dirichlet(65).unwrap();
        let f = Field::from_fn(g, 0.0, |x| 0.7 * (3.0 * PI * x).sin());
        let ModalRepr::Sine(c) = ModalRepr::from_field(&f) else { panic!() };
        for (k, ck) in c.iter().enumerate() {
            let want = if k == 2 { 0.7 } else { 0.0 };
            assert!((ck - want).abs() < 1e-13, "mode {}: {ck}", k + 1);
        }
    }

    #[test]
    fn cosine_round_trip_and_derivative() {
        let g = Grid1D::dirichlet(65).unwrap().with_bc(BoundaryKind::Neumann);
        let f = Field::from_fn(g, 0.0, |x| 1.0 + 0.3 * (PI * x).cos() - 0.2 * (4.0 * PI * x).cos());
        let rep = ModalRepr::from_field(&f);
        let back = rep.to_field(g, 0.0);
        for (a, b) in f.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-13);
        }
        let ModalRepr::Cosine(c) = rep else { panic!() };
        assert!((c[0] - 2.0).abs() < 1e-13);
        assert!((c[1] - 0.3).abs() < 1e-13);
        let d = CosineTransform::new(65).derivative_at_nodes(&c);
        for (j, x) in g.nodes().into_iter().enumerate() {
            let want = -0.3 * PI * (PI * x).sin() + 0.8 * PI * (4.0 * PI * x).sin();
            assert!((d[j] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn fourier_round_trip() {
        let g = Grid1D::periodic(48).unwrap();
        let f = Field::from_fn(g, 0.0, |x| (2.0 * PI * x).sin().exp());
        let back = ModalRepr::from_field(&f).to_field(g, 0.0);
        for (a, b) in f.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn trig_series_is_sparse_and_exact() {
        let g = Grid1D::periodic(512).unwrap();
        let f = Field::from_fn(g, 0.0, |x| 0.1 * (2.0 * PI * x + 0.5).sin());
        let s = TrigSeries::from_field(&f);
        assert_eq!(s.n_terms(), 1);
        for x in [0.0, 0.123, 0.77, 1.3] {
            assert!((s.eval(x) - 0.1 * (2.0 * PI * x + 0.5).sin()).abs() < 1e-15);
            assert!((s.slope(x) - 0.2 * PI * (2.0 * PI * x + 0.5).cos()).abs() < 1e-14);
        }
    }
}
