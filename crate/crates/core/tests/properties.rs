use std::f64::consts::{FRAC_PI_2, PI};

use gradgraph::asymptotics::{fit_expansion, FitOptions};
use gradgraph::harmonics::{ladder_between, max_mode_residual, solve_modek, ModeSeries, ModeSign, TailModel};
use gradgraph::operators::{Equation, Vec2};
use gradgraph::solutions::{build, AffineFrame, ExteriorSolution, SolutionDescriptor};
use proptest::prelude::*;

fn lower(eq: &Equation) -> f64 {
    eq.tau_params()
        .and_then(|p| p.admissibility().lower_bound)
        .unwrap_or(-20.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partner_lies_on_the_level_set(tau in 0.0..FRAC_PI_2, c0 in -1.0f64..1.0, u in 0.0f64..1.0) {
        let eq = match Equation::tau(tau, c0) {
            Ok(eq) => eq,
            Err(_) => return Ok(()),
        };
        let l = lower(&eq) + 0.05 + 10.0 * u;
        prop_assume!(eq.is_admissible(l));
        if let Ok(m) = eq.partner(l) {
            prop_assert!((eq.value(l, m).unwrap() - eq.target()).abs() < 1e-10);
        }
    }

    #[test]
    fn descriptor_json_round_trips(c0 in -1.0f64..1.0, c1 in 0.0f64..3.0, angle in 0.0..PI) {
        let d = SolutionDescriptor::Transform {
            base: Box::new(SolutionDescriptor::MaRadialExact { c0, c1 }),
            frame: AffineFrame { rotation_angle: angle, x0: Vec2::new(0.5, -1.0), beta_add: Vec2::ZERO, gamma_add: 0.0 },
        };
        let sol = build(&d).unwrap();
        let back = ExteriorSolution::from_json(&sol.to_json()).unwrap();
        let x = Vec2::polar(7.0, angle + 1.0);
        prop_assert_eq!(sol.value(x).unwrap().to_bits(), back.value(x).unwrap().to_bits());
    }

    #[test]
    fn mode_solve_is_linear(k in 0usize..4, s in 0.1f64..10.0) {
        let radii = ladder_between(3.0, 300.0, 0.02);
        let series = |scale: f64| ModeSeries {
            k,
            m: 0,
            radii: radii.clone(),
            coeffs: radii.iter().map(|r| scale * r.powi(-5)).collect(),
        };
        let (b1, bs) = (series(1.0), series(s));
        let solve = |b: &ModeSeries| {
            let tail = TailModel::from_last(&b.radii, &b.coeffs, 5.0, 0.0);
            solve_modek(k, b, 5.0, &tail, ModeSign::Validated).unwrap()
        };
        let (a1, a_s) = (solve(&b1), solve(&bs));
        for (x, y) in a1.coeffs.iter().zip(&a_s.coeffs) {
            prop_assert!((s * x - y).abs() <= 1e-12 * y.abs().max(1e-300));
        }
        prop_assert!(max_mode_residual(&a1, &b1).unwrap() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn d_survives_rigid_motions(angle in 0.0..PI, x0 in -2.0f64..2.0, y0 in -2.0f64..2.0) {
        let d = SolutionDescriptor::Transform {
            base: Box::new(SolutionDescriptor::MaRadialExact { c0: 0.0, c1: 1.0 }),
            frame: AffineFrame { rotation_angle: angle, x0: Vec2::new(x0, y0), beta_add: Vec2::ZERO, gamma_add: 0.0 },
        };
        let c = fit_expansion(&build(&d).unwrap(), &FitOptions::geometric(20.0, 1e4, 40, 128)).unwrap();
        prop_assert!((c.d - 0.25).abs() < 1e-6, "d = {}", c.d);
        prop_assert!((c.d1 + 0.5 * x0).abs() < 1e-4 && (c.d2 + 0.5 * y0).abs() < 1e-4, "{} {}", c.d1, c.d2);
    }
}
