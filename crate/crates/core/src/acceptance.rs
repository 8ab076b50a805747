//! The acceptance suite: eleven numbered checks of the solvers against
//! closed forms and structural properties, shared by `bfn verify` and the
//! `acceptance` test target.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use serde::Serialize;

use crate::bfn::{
    figure1_config, illposedness_diagnostic, modal_field, oracle_deviation, run_bfn, BfnConfig, FieldSource,
    Figure1Variant, OracleCase,
};
use crate::burgers::{
    bn_sequence, cole_hopf_reference, inverse_square_coefficients, k0_wellposedness_check, proposition7_check,
    solve_inviscid_burgers, solve_viscous_burgers_forward,
};
use crate::characteristics::{observability_certificate, BoundaryData};
use crate::equation::{Advection, EquationSpec};
use crate::error::Result;
use crate::field::{Field, Profile};
use crate::gain::Gain;
use crate::trajectory::{Observations, Stepping, Sweep};

pub const CRITERIA: usize = 11;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: String,
    pub passed: bool,
    pub measured: BTreeMap<String, f64>,
    pub tolerance: String,
    pub detail: String,
    /// Wall time; left out of `verify.json` so repeated runs compare equal.
    #[serde(skip)]
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {} ({:.2} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.detail
        )
    }
}

struct Outcome {
    passed: bool,
    measured: Vec<(String, f64)>,
    detail: String,
}

const NAMES: [(&str, &str); CRITERIA] = [
    ("viscous linear, constant gain closed form", "max_t ||w~(t) - e^{-2(1-t)} w(t)|| / ||w0|| <= 1e-8"),
    ("viscous linear, temporal window closed form", "| ||w~(0)|| / ||w(0)|| - e^{-1} | <= 1e-8"),
    ("viscous linear, spatial gain ill-posedness witness", "ratio >= 1e3; residual decreasing over K = 10, 1, 0.1"),
    ("transport decrease rate equals 2 chi", "|rate - 2 chi| <= 1e-6; positive iff T > 0.5; |rate - 1| <= 1e-6 at T = 1"),
    ("inviscid Bürgers norm bound", "lhs <= rhs at every stored t, zero slack"),
    ("inviscid Bürgers along-curve error formula", "dev(2048) <= 1e-3 and dev(4096) <= 0.6 dev(2048)"),
    ("observability threshold", "w(T)/w(0) <= e^{-K m} for every included foot"),
    ("viscous Bürgers with K = 0 via Cole-Hopf", "round trip <= 1e-6; finite differences vs Cole-Hopf <= 1e-4"),
    ("viscous Bürgers coefficient growth", "b = 0 at K = K' = 0; max g >= 0.4 and non-decreasing in N; N = 2 to 1e-12"),
    ("Multi-iteration transport BFN", "|c_j - e^{-2T}| <= 1e-6 and |c_j - c_1| <= 1e-6"),
    ("Bürgers decrease-rate structure at T = 1", "rate > 0 everywhere; mean on [0.5,0.6] > mean on [0,0.1]"),
];

fn check(id: usize) -> Result<Outcome> {
    match id {
        1 => theorem1_constant(),
        2 => theorem1_window(),
        3 => theorem1_spatial(),
        4 => transport_rates(),
        5 => burgers_bound(),
        6 => along_curve_formula(),
        7 => observability_threshold(),
        8 => cole_hopf_case(),
        9 => coefficient_growth(),
        10 => multi_iteration(),
        11 => burgers_structure(),
        _ => unreachable!("criteria are numbered 1..={CRITERIA}"),
    }
}

/// Runs criterion `id` (1-based).
pub fn run_criterion(id: usize) -> CriterionResult {
    assert!((1..=CRITERIA).contains(&id), "no criterion {id}");
    let (name, tolerance) = NAMES[id - 1];
    let start = Instant::now();
    let outcome = check(id).unwrap_or_else(|e| Outcome {
        passed: false,
        measured: Vec::new(),
        detail: format!("error: {e}"),
    });
    CriterionResult {
        id,
        name: name.into(),
        passed: outcome.passed,
        measured: outcome.measured.into_iter().collect(),
        tolerance: tolerance.into(),
        detail: outcome.detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn run_all() -> Vec<CriterionResult> {
    (1..=CRITERIA).map(run_criterion).collect()
}

fn viscous_linear_config(gain: Gain) -> Result<BfnConfig> {
    let spec = EquationSpec::viscous_linear(0.01, 0.0, 129, 1.0)?;
    let u0 = modal_field(&spec, &[1.0, -0.4, 0.5, 0.0, 0.2, 0.0, 0.1, 0.25])?;
    let uobs0 = modal_field(&spec, &[0.3, 0.0, -0.1])?;
    Ok(BfnConfig::new(
        spec,
        gain,
        FieldSource::Samples(u0.into_values()),
        FieldSource::Samples(uobs0.into_values()),
    )
    .with_nt(256))
}

fn theorem1_constant() -> Result<Outcome> {
    let report = run_bfn(&viscous_linear_config(Gain::constant(1.0, 1.0)?)?)?;
    let dev = oracle_deviation(&report, OracleCase::Theorem1)?;
    Ok(Outcome {
        passed: dev <= 1e-8,
        measured: vec![("deviation".into(), dev)],
        detail: format!("deviation {dev:.3e}"),
    })
}

fn theorem1_window() -> Result<Outcome> {
    let report = run_bfn(&viscous_linear_config(Gain::windowed(1.0, 1.0, 0.25, 0.75)?)?)?;
    let it = &report.iterations[0];
    let ratio = it.wtilde0_norm / it.w0_norm;
    let gap = (ratio - (-1.0f64).exp()).abs();
    let dev = oracle_deviation(&report, OracleCase::Theorem1)?;
    Ok(Outcome {
        passed: gap <= 1e-8,
        measured: vec![("ratio".into(), ratio), ("gap".into(), gap), ("oracle_deviation".into(), dev)],
        detail: format!("ratio {ratio:.12}, gap {gap:.3e}"),
    })
}

fn theorem1_spatial() -> Result<Outcome> {
    let spec = EquationSpec::viscous_linear(0.01, 0.0, 129, 1.0)?;
    let w0 = modal_field(&spec, &[1.0, -0.4, 0.5, 0.0, 0.2, 0.0, 0.1, 0.25])?;
    let mut measured = Vec::new();
    let mut residuals = Vec::new();
    let mut ratio_at_10 = 0.0;
    for k in [10.0, 1.0, 0.1] {
        let d = illposedness_diagnostic(&spec, &Gain::spatial(k, 1.0, 0.0, 0.5)?, &w0)?;
        measured.push((format!("residual_K{k}"), d.residual));
        measured.push((format!("reference_residual_K{k}"), d.reference_residual));
        if k == 10.0 {
            ratio_at_10 = d.ratio;
            measured.push(("ratio_K10".into(), d.ratio));
        }
        residuals.push(d.residual);
    }
    let decreasing = residuals.windows(2).all(|w| w[1] < w[0]);
    Ok(Outcome {
        passed: ratio_at_10 >= 1e3 && decreasing,
        measured,
        detail: format!(
            "ratio {ratio_at_10:.3e}; residuals {:.3e}, {:.3e}, {:.3e}",
            residuals[0], residuals[1], residuals[2]
        ),
    })
}

fn transport_rates() -> Result<Outcome> {
    let mut measured = Vec::new();
    let mut passed = true;
    let mut notes = Vec::new();
    for t in [0.05, 0.25, 0.5, 0.75, 1.0] {
        let report = run_bfn(&figure1_config(Figure1Variant::Linear, t, 512, 512)?)?;
        let chi = report.chi.as_ref().expect("transport runs record chi");
        let mut dev: f64 = 0.0;
        let mut positive = true;
        let mut unit: f64 = 0.0;
        for (r, c) in report.profile.rate.iter().zip(chi) {
            match r {
                Some(r) => {
                    dev = dev.max((r - 2.0 * c).abs());
                    unit = unit.max((r - 1.0).abs());
                    positive &= *r > 0.0;
                }
                // excluded nodes (w0 = 0) fall back on the occupation time
                None => positive &= 2.0 * c > 0.0,
            }
        }
        let ok = dev <= 1e-6 && positive == (t > 0.5) && (t != 1.0 || unit <= 1e-6);
        passed &= ok;
        measured.push((format!("max_dev_T{t}"), dev));
        if t == 1.0 {
            measured.push(("max_unit_gap_T1".into(), unit));
        }
        notes.push(format!("T={t}: dev {dev:.1e}, positive {positive}"));
    }
    Ok(Outcome {
        passed,
        measured,
        detail: notes.join("; "),
    })
}

fn burgers_setup(t: f64, gain: Gain, nt: usize) -> Result<BfnConfig> {
    let spec = EquationSpec::inviscid_burgers(256, t)?;
    let obs = Profile::Sin2Pi {
        amplitude: 0.1,
        phase: 0.5,
        wavenumber: 1,
    };
    Ok(BfnConfig::new(spec, gain, Profile::sin_2pi(0.2), obs).with_nt(nt))
}

fn burgers_bound() -> Result<Outcome> {
    let mut measured = Vec::new();
    let mut passed = true;
    let mut notes = Vec::new();
    for (label, gain) in [("constant", Gain::constant(1.0, 1.0)?), ("window", Gain::windowed(1.0, 1.0, 0.1, 0.4)?)] {
        let report = run_bfn(&burgers_setup(0.5, gain, 1024)?)?;
        let samples = report.bound_samples.as_ref().expect("uniform gains record the bound");
        let all = samples.iter().all(|s| s.lhs <= s.rhs);
        let worst = samples
            .iter()
            .filter(|s| s.rhs > 0.0)
            .map(|s| s.lhs / s.rhs)
            .fold(0.0, f64::max);
        passed &= all;
        measured.push((format!("max_lhs_over_rhs_{label}"), worst));
        measured.push((format!("m_bound_{label}"), report.flags.m_bound.unwrap_or(f64::NAN)));
        notes.push(format!("{label}: max lhs/rhs {worst:.4}"));
    }
    Ok(Outcome {
        passed,
        measured,
        detail: notes.join("; "),
    })
}

fn along_curve_formula() -> Result<Outcome> {
    let cfg = burgers_setup(0.5, Gain::constant(1.0, 1.0)?, 2048)?;
    let (u0, uobs0) = cfg.validate()?;
    let obs = Observations::Free(uobs0);
    let mut devs = Vec::new();
    for nt in [2048, 4096] {
        let run = solve_inviscid_burgers(&cfg.spec, &cfg.gain, Sweep::Forward, &BoundaryData::Initial(u0.clone()), &obs, nt)?;
        devs.push(proposition7_check(&cfg.gain, &run, &obs).into_iter().fold(0.0, f64::max));
    }
    let ratio = devs[1] / devs[0];
    Ok(Outcome {
        passed: devs[0] <= 1e-3 && devs[1] <= 0.6 * devs[0],
        measured: vec![("dev_2048".into(), devs[0]), ("dev_4096".into(), devs[1]), ("ratio".into(), ratio)],
        detail: format!("dev {:.3e} -> {:.3e} (ratio {ratio:.3})", devs[0], devs[1]),
    })
}

fn observability_threshold() -> Result<Outcome> {
    let spec = EquationSpec::inviscid_burgers(256, 1.0)?;
    let k = 1.0;
    let gain = Gain::spatial(k, 1.0, 0.0, 0.5)?;
    let u0 = Field::from_fn(spec.grid(), 0.0, |x| 1.0 + 0.1 * (2.0 * PI * x).sin());
    let run = solve_inviscid_burgers(&spec, &gain, Sweep::Forward, &BoundaryData::Initial(u0), &Observations::Zero, 2048)?;
    let cert = observability_certificate(&gain, &run.chars, 0.0);
    let bound = (-k * cert.m).exp();
    let last = run.chars.times().len() - 1;
    let scale = run.errors.iter().map(|w| w[0].abs()).fold(0.0, f64::max);
    let mut worst: f64 = 0.0;
    let mut included = 0;
    for w in &run.errors {
        if w[0].abs() <= 1e-10 * scale {
            continue;
        }
        included += 1;
        worst = worst.max((w[last] / w[0]).abs());
    }
    Ok(Outcome {
        passed: cert.observable && included > 0 && worst <= bound,
        measured: vec![("m".into(), cert.m), ("max_ratio".into(), worst), ("bound".into(), bound)],
        detail: format!("m {:.6}, max ratio {worst:.10} vs e^(-Km) {bound:.10}", cert.m),
    })
}

fn cole_hopf_case() -> Result<Outcome> {
    let spec = EquationSpec::viscous_burgers(0.05, 513, 0.5)?;
    let ic = Profile::sin_pi(0.2).sample(spec.grid());
    // nu (32 pi)^2 T ~ 252.7, so the cap must exceed it
    let round_trip = k0_wellposedness_check(&spec, &ic, 32, 300.0, Stepping::with_stride(100, 10))?;
    let fd_spec = EquationSpec::viscous_burgers(0.05, 257, 0.5)?;
    let fd_ic = Profile::sin_pi(0.2).sample(fd_spec.grid());
    let stepping = Stepping::with_stride(1000, 100);
    let fd = solve_viscous_burgers_forward(&fd_spec, &Gain::zero(), &fd_ic, &Observations::Zero, stepping)?;
    let reference = cole_hopf_reference(&fd_spec, &fd_ic, stepping)?;
    let mut gap: f64 = 0.0;
    for (a, b) in fd.snapshots().iter().zip(reference.snapshots()) {
        gap = gap.max(a.sub(b)?.max_abs());
    }
    gap /= fd_ic.max_abs();
    Ok(Outcome {
        passed: round_trip <= 1e-6 && gap <= 1e-4,
        measured: vec![("round_trip".into(), round_trip), ("fd_vs_cole_hopf".into(), gap)],
        detail: format!("round trip {round_trip:.3e}, FD gap {gap:.3e}"),
    })
}

fn coefficient_growth() -> Result<Outcome> {
    let zero = bn_sequence(&inverse_square_coefficients(128), 0.0, 0.0, 1.0, 1.0)?;
    let mut maxima = Vec::new();
    for n in [32, 64, 128] {
        let s = bn_sequence(&inverse_square_coefficients(n), 1.0, 1.0, 1.0, 1.0)?;
        maxima.push(s.max_growth().unwrap_or(f64::NEG_INFINITY));
    }
    let (k, kp, nu, t) = (1.0f64, 1.0f64, 1.0f64, 1.0f64);
    let d = 2.0 * kp + k + 2.0 * nu;
    let by_hand = ((k - kp) * t).exp() * ((-2.0 * (k + kp) * t).exp() - 1.0) * ((t * d).exp() - 1.0) / d;
    let two = bn_sequence(&inverse_square_coefficients(2), k, kp, nu, t)?;
    let got = two.b[1].to_complex();
    let hand_err = (got - Complex64::new(by_hand, 0.0)).norm() / by_hand.abs();
    let non_decreasing = maxima.windows(2).all(|w| w[1] >= w[0]);
    Ok(Outcome {
        passed: zero.all_zero() && maxima[2] >= 0.4 && non_decreasing && hand_err <= 1e-12,
        measured: vec![
            ("max_g_N32".into(), maxima[0]),
            ("max_g_N64".into(), maxima[1]),
            ("max_g_N128".into(), maxima[2]),
            ("hand_case_rel_error".into(), hand_err),
        ],
        detail: format!(
            "zero case {}, max g {:.4}/{:.4}/{:.4}, N=2 error {hand_err:.1e}",
            zero.all_zero(),
            maxima[0],
            maxima[1],
            maxima[2]
        ),
    })
}

fn multi_iteration() -> Result<Outcome> {
    let n = 256;
    let t = 1.0;
    let grid = crate::grid::Grid1D::periodic(n)?;
    let a: Vec<f64> = grid.nodes().iter().map(|x| 1.0 + 0.5 * (2.0 * PI * x).sin()).collect();
    let spec = EquationSpec::inviscid_linear(Advection::Profile(a), n, t)?;
    let u0 = Profile::Sin2Pi {
        amplitude: 0.5,
        phase: 0.2,
        wavenumber: 2,
    };
    let obs = Profile::Sin2Pi {
        amplitude: 0.2,
        phase: 0.3,
        wavenumber: 1,
    };
    let cfg = BfnConfig::new(spec, Gain::constant(1.0, 1.0)?, u0, obs).with_nt(256).with_iterations(3);
    let report = run_bfn(&cfg)?;
    let c: Vec<f64> = report.iterations.iter().map(|r| r.contraction().unwrap_or(f64::NAN)).collect();
    let target = (-2.0 * t).exp();
    let gap = c.iter().map(|x| (x - target).abs()).fold(0.0, f64::max);
    let spread = c.iter().map(|x| (x - c[0]).abs()).fold(0.0, f64::max);
    Ok(Outcome {
        passed: gap <= 1e-6 && spread <= 1e-6,
        measured: vec![("c1".into(), c[0]), ("c2".into(), c[1]), ("c3".into(), c[2]), ("max_gap".into(), gap)],
        detail: format!("contractions {:.10}, {:.10}, {:.10} vs {target:.10}", c[0], c[1], c[2]),
    })
}

fn mean_rate(x: &[f64], rate: &[Option<f64>], lo: f64, hi: f64) -> f64 {
    let v: Vec<f64> = x
        .iter()
        .zip(rate)
        .filter(|(x, _)| (lo..=hi).contains(*x))
        .filter_map(|(_, r)| *r)
        .collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn burgers_structure() -> Result<Outcome> {
    let report = run_bfn(&figure1_config(Figure1Variant::Burgers, 1.0, 512, 1024)?)?;
    let p = &report.profile;
    let chi = report.chi.as_ref().expect("inviscid runs record chi");
    let mut positive = true;
    let mut non_positive = 0;
    for (r, c) in p.rate.iter().zip(chi) {
        let ok = match r {
            Some(r) => *r > 0.0,
            None => *c > 0.0,
        };
        if !ok {
            positive = false;
            non_positive += 1;
        }
    }
    let right = mean_rate(&p.x, &p.rate, 0.5, 0.6);
    let left = mean_rate(&p.x, &p.rate, 0.0, 0.1);
    let min = p.rate.iter().flatten().copied().fold(f64::INFINITY, f64::min);
    Ok(Outcome {
        passed: positive && right > left,
        measured: vec![
            ("min_rate".into(), min),
            ("mean_rate_0.5_0.6".into(), right),
            ("mean_rate_0_0.1".into(), left),
            ("non_positive_nodes".into(), non_positive as f64),
        ],
        detail: format!(
            "{non_positive} of {} nodes without positive rate; mean [0.5,0.6] {right:.4} vs [0,0.1] {left:.4}",
            p.x.len()
        ),
    })
}
