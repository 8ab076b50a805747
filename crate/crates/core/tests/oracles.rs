//! Solver outputs against closed forms computed independently in the tests.

use std::f64::consts::PI;

use bfn_core::bfn::{run_bfn, BfnConfig};
use bfn_core::burgers::solve_inviscid_burgers;
use bfn_core::characteristics::BoundaryData;
use bfn_core::linear_pde::{solve_forward_linear, solve_forward_linear_cn, Nudging};
use bfn_core::{l2_norm, Advection, EquationSpec, Field, Gain, Grid1D, Observations, Profile, Stepping, Sweep};

/// Time spent by `s -> (x + s) mod 1` in `[a, b]` for `s` in `[0, t]`,
/// by summing over unit periods.
fn translation_occupation(x: f64, t: f64, a: f64, b: f64) -> f64 {
    let mut total = 0.0;
    let mut period = (x).floor() - 1.0;
    while period <= x + t + 1.0 {
        let lo = (period + a - x).max(0.0);
        let hi = (period + b - x).min(t);
        total += (hi - lo).max(0.0);
        period += 1.0;
    }
    total
}

/// Root of `y = x + alpha sin(2 pi y) t` by bisection, the implicit solution
/// of inviscid Bürgers read backwards: foot `y` of the curve through `x`.
fn burgers_foot(x: f64, alpha: f64, t: f64) -> f64 {
    let f = |y: f64| y + alpha * (2.0 * PI * y).sin() * t - x;
    let (mut lo, mut hi) = (x - alpha * t - 1e-9, x + alpha * t + 1e-9);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn l2_norm_of_unit_sine_is_root_half() {
    let f = Profile::sin_2pi(1.0).sample(Grid1D::periodic(256).unwrap());
    assert!((l2_norm(&f) - 0.5f64.sqrt()).abs() <= 1e-4);
}

#[test]
fn half_support_transport_rate_is_twice_occupation() {
    for t in [0.05, 0.25, 0.5, 0.75, 1.0] {
        let spec = EquationSpec::inviscid_linear(Advection::Constant(1.0), 128, t).unwrap();
        let gain = Gain::spatial(1.0, 1.0, 0.0, 0.5).unwrap();
        let cfg = BfnConfig::new(spec.clone(), gain, Profile::sin_2pi(1.0), Profile::Zero).with_nt(256);
        let rep = run_bfn(&cfg).unwrap();
        for (j, rate) in rep.profile.rate.iter().enumerate() {
            let x = spec.grid().x(j);
            let expected = 2.0 * translation_occupation(x, t, 0.0, 0.5);
            if let Some(r) = rate {
                assert!((r - expected).abs() <= 1e-6, "T={t} x={x}: {r} vs {expected}");
            }
        }
    }
}

#[test]
fn constant_gain_iterations_shrink_by_e_to_minus_two_t() {
    let spec = EquationSpec::inviscid_linear(Advection::Constant(1.0), 64, 1.0).unwrap();
    let cfg = BfnConfig::new(spec, Gain::constant(1.0, 1.0).unwrap(), Profile::sin_2pi(0.7), Profile::Zero)
        .with_nt(128)
        .with_iterations(3);
    let rep = run_bfn(&cfg).unwrap();
    let w0 = rep.iterations[0].w0_norm;
    for (j, it) in rep.iterations.iter().enumerate() {
        assert!((it.w0_norm / w0 - (-2.0 * j as f64).exp()).abs() <= 1e-6);
        assert!((it.wtilde0_norm / w0 - (-2.0 * (j + 1) as f64).exp()).abs() <= 1e-6);
    }
}

#[test]
fn unnudged_inviscid_burgers_matches_implicit_solution() {
    let alpha = 0.1;
    let t = 1.0;
    assert!(t < 1.0 / (2.0 * PI * alpha));
    let spec = EquationSpec::inviscid_burgers(128, t).unwrap();
    let u0 = Profile::sin_2pi(alpha).sample(spec.grid());
    let run = solve_inviscid_burgers(
        &spec,
        &Gain::zero(),
        Sweep::Forward,
        &BoundaryData::Initial(u0),
        &Observations::Zero,
        256,
    )
    .unwrap();
    let last = run.chars.times().len() - 1;
    let positions = run.chars.lifted_at(last);
    for (j, (x, u)) in positions.iter().zip(run.errors_at(last)).enumerate() {
        let foot = spec.grid().x(j);
        let expected = alpha * (2.0 * PI * foot).sin();
        assert!((u - expected).abs() <= 1e-6, "foot {foot}: {u} vs {expected}");
        assert!((x - (foot + expected * t)).abs() <= 1e-6, "foot {foot}: {x}");
        // the grid value at the landing point agrees with the implicit solution
        assert!((burgers_foot(*x, alpha, t) - foot).abs() <= 1e-9);
    }
}

#[test]
fn unnudged_inviscid_burgers_observations_are_a_fixed_point() {
    let spec = EquationSpec::inviscid_burgers(64, 0.5).unwrap();
    let p = Profile::sin_2pi(0.2);
    let cfg = BfnConfig::new(spec, Gain::constant(1.0, 1.0).unwrap(), p, p).with_nt(64);
    let rep = run_bfn(&cfg).unwrap();
    let it = &rep.iterations[0];
    assert_eq!(it.w0_norm, 0.0);
    // observations are re-evaluated through the implicit solution, exact up to rounding
    assert!(it.wt_norm <= 1e-14 && it.wtilde0_norm <= 1e-14, "{it:?}");
}

#[test]
fn modal_and_crank_nicolson_agree_without_gain() {
    let spec = EquationSpec::viscous_linear(0.05, 0.0, 129, 0.5).unwrap();
    let ic = Field::from_fn(spec.grid(), 0.0, |x| (PI * x).sin() + 0.3 * (3.0 * PI * x).sin());
    let g = Gain::zero();
    let modal = solve_forward_linear(&spec, &g, Nudging::Damping, &ic, &Observations::Zero, Stepping::new(200)).unwrap();
    let cn = solve_forward_linear_cn(&spec, &g, Nudging::Damping, &ic, &Observations::Zero, Stepping::new(200)).unwrap();
    let gap = modal.last().sub(cn.last()).unwrap().max_abs();
    // O(dt^2 + dx^2) with dt = 2.5e-3 and dx = 1/128.
    assert!(gap <= 1e-3, "{gap}");
    let halved = EquationSpec::viscous_linear(0.05, 0.0, 257, 0.5).unwrap();
    let ic2 = Field::from_fn(halved.grid(), 0.0, |x| (PI * x).sin() + 0.3 * (3.0 * PI * x).sin());
    let m2 = solve_forward_linear(&halved, &g, Nudging::Damping, &ic2, &Observations::Zero, Stepping::new(400)).unwrap();
    let c2 = solve_forward_linear_cn(&halved, &g, Nudging::Damping, &ic2, &Observations::Zero, Stepping::new(400)).unwrap();
    let gap2 = m2.last().sub(c2.last()).unwrap().max_abs();
    assert!(gap2 < 0.3 * gap, "{gap} -> {gap2}");
}

#[test]
fn windowed_gain_single_mode_decays_exactly() {
    // mode k decays as exp(-K |window| - nu (k pi)^2 T)
    let spec = EquationSpec::viscous_linear(0.01, 0.0, 65, 1.0).unwrap();
    let ic = Profile::SinPi { amplitude: 1.0, mode: 3 }.sample(spec.grid());
    let tr = solve_forward_linear(
        &spec,
        &Gain::windowed(2.0, 1.0, 0.25, 0.75).unwrap(),
        Nudging::Damping,
        &ic,
        &Observations::Zero,
        Stepping::new(64),
    )
    .unwrap();
    let expected = (-2.0 * 0.5 - 0.01 * (3.0 * PI).powi(2)).exp();
    assert!((l2_norm(tr.last()) / l2_norm(&ic) - expected).abs() <= 1e-10);
}
