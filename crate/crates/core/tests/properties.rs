use bfn_core::bfn::{decrease_rate_profile, run_bfn, BfnConfig};
use bfn_core::burgers::{bn_sequence, inverse_square_coefficients};
use bfn_core::characteristics::{trace, Velocity};
use bfn_core::cli_io::RunConfigFile;
use bfn_core::linear_pde::{solve_forward_linear, Nudging};
use bfn_core::spectral::ModalRepr;
use bfn_core::{l2_norm, Advection, EquationSpec, Field, Gain, Grid1D, Observations, Profile, Stepping};
use proptest::prelude::*;

fn interval() -> impl Strategy<Value = (f64, f64)> {
    (0.0..1.0f64, 0.0..1.0f64).prop_map(|(a, b)| if a <= b { (a, b) } else { (b, a) })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gain_is_nonnegative_and_backward_is_kappa_times_forward(
        k in 0.0..20.0f64,
        kappa in 0.01..5.0f64,
        (a, b) in interval(),
        t in 0.0..1.0f64,
        x in 0.0..1.0f64,
    ) {
        let g = Gain::spatial(k, kappa, a, b).unwrap();
        let f = g.evaluate(t, x);
        prop_assert!(f >= 0.0);
        prop_assert!(f == 0.0 || f == k);
        prop_assert!((g.evaluate_backward(t, x) - kappa * f).abs() <= 1e-15 * (1.0 + kappa * k));
    }

    #[test]
    fn l2_norm_is_absolutely_homogeneous(
        vals in prop::collection::vec(-10.0..10.0f64, 16),
        s in -5.0..5.0f64,
    ) {
        let g = Grid1D::periodic(16).unwrap();
        let f = Field::new(g, vals, 0.0).unwrap();
        let lhs = l2_norm(&f.scaled(s));
        let rhs = s.abs() * l2_norm(&f);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs));
        prop_assert_eq!(l2_norm(&f) == 0.0, f.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn modal_round_trip_is_exact(
        inner in prop::collection::vec(-3.0..3.0f64, 30),
        periodic in any::<bool>(),
    ) {
        let f = if periodic {
            Field::new(Grid1D::periodic(30).unwrap(), inner, 0.0).unwrap()
        } else {
            let mut v = vec![0.0];
            v.extend_from_slice(&inner[..28]);
            v.push(0.0);
            Field::new(Grid1D::dirichlet(30).unwrap(), v, 0.0).unwrap()
        };
        let back = ModalRepr::from_field(&f).to_field(*f.grid(), 0.0);
        let scale = f.max_abs().max(1.0);
        for (a, b) in f.values().iter().zip(back.values()) {
            prop_assert!((a - b).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn constant_speed_curves_are_translations(c in -2.0..2.0f64, t in 0.01..2.0f64) {
        let feet: Vec<f64> = (0..16).map(|j| j as f64 / 16.0).collect();
        let cf = trace(&Velocity::Profile(vec![c; 16]), &feet, t, 40).unwrap();
        let last = cf.positions_at(cf.times().len() - 1);
        for (x, p) in feet.iter().zip(&last) {
            let expected = (x + c * t).rem_euclid(1.0);
            let d = (p - expected).abs();
            prop_assert!(d.min(1.0 - d) <= 1e-12, "{} vs {}", p, expected);
        }
    }

    #[test]
    fn zero_gains_give_zero_coefficients(nu in 0.1..2.0f64, t in 0.1..2.0f64, n in 1usize..64) {
        let seq = bn_sequence(&inverse_square_coefficients(n), 0.0, 0.0, nu, t).unwrap();
        prop_assert!(seq.all_zero());
    }

    #[test]
    fn coefficient_growth_is_finite(k in 0.1..3.0f64, kp in 0.1..3.0f64, n in 2usize..96) {
        let seq = bn_sequence(&inverse_square_coefficients(n), k, kp, 1.0, 1.0).unwrap();
        prop_assert_eq!(seq.len(), n);
        for (_, g) in seq.growth() {
            if let Some(g) = g {
                prop_assert!(g.is_finite());
            }
        }
    }

    #[test]
    fn rate_profile_recovers_uniform_decay(
        vals in prop::collection::vec(0.5..2.0f64, 12),
        signs in prop::collection::vec(any::<bool>(), 12),
        r in 0.0..10.0f64,
    ) {
        let g = Grid1D::periodic(12).unwrap();
        let w0: Vec<f64> = vals.iter().zip(&signs).map(|(v, s)| if *s { *v } else { -v }).collect();
        let wt: Vec<f64> = w0.iter().map(|v| v * (-r).exp()).collect();
        let rates = decrease_rate_profile(&Field::new(g, w0, 0.0).unwrap(), &Field::new(g, wt, 0.0).unwrap()).unwrap();
        for rate in rates {
            let rate = rate.unwrap();
            prop_assert!((rate - r).abs() <= 1e-12 * (1.0 + r));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn single_sine_mode_decays_exactly(k in 0.0..3.0f64, nu in 0.001..0.05f64, t in 0.1..1.0f64) {
        let spec = EquationSpec::viscous_linear(nu, 0.0, 65, t).unwrap();
        let ic = Profile::sin_pi(1.0).sample(spec.grid());
        let gain = Gain::constant(k, 1.0).unwrap();
        let tr = solve_forward_linear(&spec, &gain, Nudging::Damping, &ic, &Observations::Zero, Stepping::new(16)).unwrap();
        let ratio = l2_norm(tr.last()) / l2_norm(&ic);
        let expected = ((-k - nu * std::f64::consts::PI.powi(2)) * t).exp();
        prop_assert!((ratio - expected).abs() <= 1e-10, "{} vs {}", ratio, expected);
    }

    #[test]
    fn doubling_kappa_squares_the_transport_contraction(
        k in 0.1..2.0f64,
        kappa in 0.2..2.0f64,
        t in 0.1..1.0f64,
    ) {
        let spec = EquationSpec::inviscid_linear(Advection::Constant(1.0), 32, t).unwrap();
        let run = |kap: f64| {
            let cfg = BfnConfig::new(spec.clone(), Gain::constant(k, kap).unwrap(), Profile::sin_2pi(1.0), Profile::Zero)
                .with_nt(32);
            run_bfn(&cfg).unwrap().iterations[0].contraction().unwrap()
        };
        let c1 = run(kappa);
        let c2 = run(2.0 * kappa);
        // c(kappa) = e^{-(1 + kappa) K T}, hence c(2 kappa) e^{-K T} = c(kappa)^2.
        prop_assert!((c1 - (-(1.0 + kappa) * k * t).exp()).abs() <= 1e-10);
        prop_assert!((c2 * (-k * t).exp() - c1 * c1).abs() <= 1e-10);
    }

    #[test]
    fn iterations_decay_geometrically(k in 0.2..2.0f64, iterations in 2usize..5) {
        let spec = EquationSpec::inviscid_linear(Advection::Constant(1.0), 32, 0.5).unwrap();
        let cfg = BfnConfig::new(spec, Gain::constant(k, 1.0).unwrap(), Profile::sin_2pi(1.0), Profile::Zero)
            .with_nt(32)
            .with_iterations(iterations);
        let rep = run_bfn(&cfg).unwrap();
        let first = rep.iterations[0].w0_norm;
        for (j, it) in rep.iterations.iter().enumerate() {
            let expected = first * (-2.0 * k * 0.5 * j as f64).exp();
            prop_assert!((it.w0_norm - expected).abs() <= 1e-10 * first);
            prop_assert!(it.w0_norm >= 0.0 && it.wt_norm >= 0.0 && it.wtilde0_norm >= 0.0);
        }
    }

    #[test]
    fn config_numbers_parse_in_any_spelling(t in 0.01..10.0f64, k in 0.0..100.0f64) {
        let text = format!("equation = linear\nadvection = 1\nT = {t:e}\ngain_amplitude = {k}\n");
        let cfg = RunConfigFile::parse(&text).unwrap();
        prop_assert_eq!(cfg.t_final, t);
        prop_assert_eq!(cfg.gain_amplitude, k);
    }

    #[test]
    fn unknown_config_keys_are_rejected(key in "[a-z]{3,10}") {
        prop_assume!(![
            "equation", "viscosity", "advection", "bc", "grid_n", "nt", "kappa", "iterations",
        ].contains(&key.as_str()));
        let text = format!("{key} = 1\n");
        prop_assert!(RunConfigFile::parse(&text).is_err());
    }
}
