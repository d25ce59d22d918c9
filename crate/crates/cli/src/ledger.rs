//! Discrepancy entries with the numbers that settle them.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_4;

use gradgraph::asymptotics::{fit_expansion, flux_d, ExpansionCoeffs, FitOptions, FormulaId};
use gradgraph::harmonics::{ladder_between, max_mode_residual, solve_modek, ModeSeries, ModeSign, TailModel};
use gradgraph::operators::{Equation, Sym2, Vec2};
use gradgraph::solutions::{radial_exact, remark_family, ExteriorSolution, RemarkNormalization};

use crate::config::RunConfig;
use crate::error::{CliError, Context};
use crate::report::{LedgerEntry, Report};

fn entry(id: &str, issue: &str, resolution: String, evidence: &[(&str, f64)]) -> LedgerEntry {
    LedgerEntry {
        id: id.into(),
        issue: issue.into(),
        resolution,
        evidence: evidence.iter().map(|(k, v)| (k.to_string(), *v)).collect::<BTreeMap<_, _>>(),
    }
}

/// All four entries, in a fixed order.
pub fn append(cfg: &RunConfig, sol: &ExteriorSolution, c: &ExpansionCoeffs, rep: &mut Report) -> Result<(), CliError> {
    q_factor(cfg, sol, c, rep)?;
    quarter_pi(cfg, rep)?;
    mode_sign(cfg, rep)?;
    normalization(rep)
}

fn q_factor(cfg: &RunConfig, sol: &ExteriorSolution, c: &ExpansionCoeffs, rep: &mut Report) -> Result<(), CliError> {
    let eq = &sol.equation;
    let a = c.a;
    let df = eq.df_matrix(&a).context(|| "DF(A)".into())?;
    let q = eq.q_matrix(&a).context(|| "canonical Q".into())?;
    let df_inv = df
        .inverse()
        .ok_or_else(|| CliError::Module {
            context: "DF(A)".into(),
            source: gradgraph::Error::InvalidArgument("singular".into()),
        })?;
    let prod = q.to_mat() * df.to_mat();
    let half_gap = [prod.a11 - 0.5, prod.a12, prod.a21, prod.a22 - 0.5]
        .into_iter()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let mut ev = vec![
        ("trace_ratio_dfinv_over_q", df_inv.trace() / q.trace()),
        ("max_abs_q_df_minus_half_identity", half_gap),
    ];
    if let Some(p) = eq.tau_params() {
        let (s, co) = p.tau.sin_cos();
        let poly = a.eigen().map(|l| 0.5 * (s * l * l + 2.0 * co * l + s));
        ev.push(("max_abs_q_minus_polynomial", q.max_abs_diff(&poly)));
    }
    rep.check_le(
        "ledger.q_factor",
        "canonical Q equals one half of DF(A)^-1",
        half_gap,
        cfg.tolerances.q_consistency,
    );
    rep.ledger.push(entry(
        "q_factor",
        "Q is stated both as (DF(A))^-1 and as the halved polynomial 1/2(sin t A^2 + 2 cos t A + sin t I); these differ by a factor 2",
        "canonical Q is the halved polynomial, so Q = 1/2 DF(A)^-1; d is unchanged by rescaling Q, gamma shifts by -d ln s and (d1, d2) scale by s^1/2".into(),
        &ev,
    ));
    Ok(())
}

fn quarter_pi(cfg: &RunConfig, rep: &mut Report) -> Result<(), CliError> {
    let eq = Equation::tau(FRAC_PI_4, -1.0).context(|| "inverse-harmonic equation".into())?;
    let sol = radial_exact(&eq, 0.7, 2.0).context(|| "inverse-harmonic radial solution".into())?;
    let l = cfg.ladder;
    let opts = FitOptions::geometric(l.r_min.max(4.0), l.r_max, l.n_rings, l.n_theta);
    let fit = fit_expansion(&sol, &opts).context(|| "inverse-harmonic fit".into())?;
    let r0 = 5.0;
    let n = cfg.flux.n_quad;
    let derived = flux_d(&sol, FormulaId::QuarterPiDerivation, r0, n).context(|| "derived inverse-harmonic flux".into())?;
    let printed = flux_d(&sol, FormulaId::QuarterPiPaper, r0, n).context(|| "printed inverse-harmonic flux".into())?;
    let gap_derived = (derived.d - fit.d).abs();
    let gap_printed = (printed.d - fit.d).abs();
    let consistent = if gap_derived <= gap_printed { "derived (u1 + x1) weight" } else { "printed (u1 + 1) weight" };
    rep.check_le(
        "ledger.quarter_pi_derivation",
        "inverse-harmonic flux with the (u1 + x1) weight equals fitted d",
        gap_derived,
        cfg.tolerances.flux_fit,
    );
    let oracle = sol.truth.map_or(f64::NAN, |t| t.d);
    rep.ledger.push(entry(
        "quarter_pi_variant",
        "the inverse-harmonic flux formula is printed with weight (u1 + 1), the divergence-theorem derivation gives (u1 + x1) and opposite signs on the area and gradient terms",
        format!("both are evaluated on an exact radial solution; the {consistent} agrees with the fitted d and is used for pass/fail"),
        &[
            ("contour_radius", r0),
            ("d_fit", fit.d),
            ("d_oracle", oracle),
            ("d_flux_derived", derived.d),
            ("d_flux_printed", printed.d),
            ("abs_gap_derived", gap_derived),
            ("abs_gap_printed", gap_printed),
        ],
    ));
    Ok(())
}

fn series(k: usize, radii: &[f64], f: impl Fn(f64) -> f64) -> ModeSeries {
    ModeSeries {
        k,
        m: 1,
        radii: radii.to_vec(),
        coeffs: radii.iter().map(|r| f(*r)).collect(),
    }
}

fn max_rel(a: &ModeSeries, want: impl Fn(f64) -> f64) -> f64 {
    a.radii
        .iter()
        .zip(&a.coeffs)
        .map(|(r, v)| ((v - want(*r)) / want(*r)).abs())
        .fold(0.0f64, f64::max)
}

/// Mode-solver examples and the sign convention that satisfies the ODE.
pub fn mode_sign(cfg: &RunConfig, rep: &mut Report) -> Result<(), CliError> {
    let tol = cfg.tolerances;
    let radii = ladder_between(3.0, 1e3, 0.02);
    let b = series(1, &radii, |r| r.powi(-4));
    let tail = TailModel::from_last(&b.radii, &b.coeffs, 4.0, 0.0);
    let solve = |k: usize, sign: ModeSign| {
        let mut bk = b.clone();
        bk.k = k;
        solve_modek(k, &bk, 4.0, &tail, sign).context(|| format!("mode {k} solve"))
    };
    let a0 = solve(0, ModeSign::Validated)?;
    let validated = solve(1, ModeSign::Validated)?;
    let printed = solve(1, ModeSign::Printed)?;
    let e0 = max_rel(&a0, |r| 0.25 / (r * r));
    let e1 = max_rel(&validated, |r| 1.0 / (3.0 * r * r));
    let res_v = max_mode_residual(&validated, &b).context(|| "mode residual".into())?;
    let res_p = max_mode_residual(&printed, &b).context(|| "mode residual".into())?;
    let mut b0 = b.clone();
    b0.k = 0;
    let res_0 = max_mode_residual(&a0, &b0).context(|| "mode residual".into())?;
    rep.check_le("modes.k0_example", "k = 0, b = r^-4 gives a = 1/(4r^2)", e0, tol.mode_residual);
    rep.check_le("modes.k1_example", "k = 1, b = r^-4 gives a = 1/(3r^2)", e1, tol.mode_residual);
    rep.check_le(
        "ledger.mode_sign",
        "the chosen k >= 1 sign convention satisfies the mode ODE",
        res_v,
        tol.mode_residual,
    );
    rep.ledger.push(entry(
        "mode_ode_sign",
        "the printed k >= 1 particular solution has the opposite overall sign to variation of parameters and yields residual -b",
        "the sign whose residual vanishes is used; the k = 0 formula is used as printed".into(),
        &[
            ("k1_relative_residual_validated", res_v),
            ("k1_relative_residual_printed", res_p),
            ("k1_max_relative_error_validated", e1),
            ("k0_relative_residual", res_0),
            ("k0_max_relative_error", e0),
        ],
    ));
    Ok(())
}

fn normalization(rep: &mut Report) -> Result<(), CliError> {
    let c0 = 2f64.ln();
    let x = Vec2::polar(1e3, 0.3);
    let det_of = |v: RemarkNormalization| -> Result<(f64, f64), CliError> {
        let s = remark_family(v, c0, 1.0).context(|| format!("radial family {v:?}"))?;
        let h: Sym2 = s.hessian(x).context(|| "radial family Hessian".into())?;
        Ok((h.det(), s.anchor().a.m11))
    };
    let (det_p, a_p) = det_of(RemarkNormalization::Printed)?;
    let (det_c, a_c) = det_of(RemarkNormalization::DetConsistent)?;
    let e2 = (2.0 * c0).exp();
    rep.check_le(
        "ledger.radial_normalization",
        "det-consistent radial family has det D^2u = e^{2C0}",
        (det_c - e2).abs() / e2,
        1e-10,
    );
    rep.ledger.push(entry(
        "radial_family_normalization",
        "the radial family is printed with prefactor e^{C0} and A = e^{C0} I, which gives det D^2u = e^{4C0} rather than e^{2C0}",
        "both variants are exposed; neither is asserted as intended, the measured determinants are recorded".into(),
        &[
            ("c0", c0),
            ("det_printed", det_p),
            ("det_consistent", det_c),
            ("exp_2c0", e2),
            ("exp_4c0", (4.0 * c0).exp()),
            ("a11_printed", a_p),
            ("a11_consistent", a_c),
        ],
    ));
    Ok(())
}
