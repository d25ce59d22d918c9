use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_6};

use approx::assert_abs_diff_eq;
use gradgraph::asymptotics::{fit_expansion, flux_d, FitOptions, FormulaId};
use gradgraph::harmonics::{ladder_between, poisson_solve, RingSamples};
use gradgraph::legendre::legendre_dual;
use gradgraph::operators::{Equation, Vec2};
use gradgraph::solutions::{radial_exact, ExteriorSolution};

/// `d` read off the radial gradient. The log term is `d ln(xᵀQx)` with `Q`
/// isotropic, so `r (U'(r) - a r) = 2d + O(r^-2)`; extrapolated from two radii.
fn d_from_gradient(sol: &ExteriorSolution) -> f64 {
    let a = sol.anchor().a.m11;
    let at = |r: f64| r * (sol.gradient(Vec2::new(r, 0.0)).unwrap().x1 - a * r);
    (4.0 * at(2e3) - at(1e3)) / 6.0
}

#[test]
fn radial_d_matches_gradient_limit_on_every_branch() {
    for (tau, c0, k) in [(0.3, -0.4, 0.7), (FRAC_PI_4, -1.0, 1.3), (1.1, 0.2, 0.5), (FRAC_PI_2, FRAC_PI_2, 2.0)] {
        let eq = Equation::tau(tau, c0).unwrap();
        let sol = radial_exact(&eq, k, 2.0).unwrap();
        let d = d_from_gradient(&sol);
        let fit = fit_expansion(&sol, &FitOptions::geometric(10.0, 1e4, 40, 128)).unwrap();
        assert_abs_diff_eq!(fit.d, d, epsilon = 1e-7);
        assert_abs_diff_eq!(sol.truth.unwrap().d, d, epsilon = 1e-7);
    }
}

#[test]
fn special_lagrangian_flux_is_contour_independent() {
    let eq = Equation::tau(FRAC_PI_2, FRAC_PI_2).unwrap();
    let sol = radial_exact(&eq, 2.0, 1.0).unwrap();
    for r in [3.0, 7.5, 40.0] {
        assert_abs_diff_eq!(flux_d(&sol, FormulaId::Sl, r, 256).unwrap().d, 0.5, epsilon = 1e-10);
    }
}

#[test]
fn poisson_recovers_decaying_harmonics() {
    // Δ(r^-p cos mθ) = (p² - m²) r^-(p+2) cos mθ
    let v = |r: f64, t: f64| r.powi(-2) + 0.5 * r.powi(-2) * t.cos();
    let g = |r: f64, t: f64| 4.0 * r.powi(-4) + 1.5 * r.powi(-4) * t.cos();
    let radii = ladder_between(3.0, 1e3, 0.02);
    let sol = poisson_solve(&RingSamples::from_fn(&radii, 32, g), 4.0, 0.0, 4).unwrap();
    let want = RingSamples::from_fn(&radii, 32, v);
    for (got, exp) in sol.v.values.iter().zip(&want.values) {
        let scale = exp.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (a, b) in got.iter().zip(exp) {
            assert!((a - b).abs() <= 1e-6 * scale, "{a} vs {b}");
        }
    }
    assert!(sol.max_residual < 1e-8);
}

#[test]
fn small_tau_dual_solves_log_equation() {
    let eq = Equation::tau(FRAC_PI_6, -1.0).unwrap();
    let sol = radial_exact(&eq, 0.8, 2.0).unwrap();
    let pair = legendre_dual(&sol, &eq.tau_params().unwrap()).unwrap();
    for j in 0..24 {
        let x = Vec2::polar(3.0 + 2.0 * j as f64, 0.37 * j as f64);
        let xt = pair.dual_point(x).unwrap();
        assert!(pair.dual.residual(xt).unwrap().abs() < 1e-9);
        let back = pair.primal_point(xt).unwrap();
        assert_abs_diff_eq!(back.x1, x.x1, epsilon = 1e-9);
        assert_abs_diff_eq!(back.x2, x.x2, epsilon = 1e-9);
    }
}
