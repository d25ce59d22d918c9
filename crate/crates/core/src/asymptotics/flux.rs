//! Boundary-flux formulas for the log coefficient `d` on circles.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::coeffs::ExpansionCoeffs;
use crate::error::{Error, Result};
use crate::operators::{Branch, Equation, Sym2, Vec2};
use crate::solutions::ExteriorSolution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FormulaId {
    #[serde(rename = "MA")]
    Ma,
    /// `0 < τ < π/4`, with the `1/b` normalization.
    SmallTau,
    /// The same, as printed (no `1/b`).
    #[serde(rename = "SmallTau_printed")]
    SmallTauPrinted,
    #[serde(rename = "QuarterPi_paper")]
    QuarterPiPaper,
    #[serde(rename = "QuarterPi_derivation")]
    QuarterPiDerivation,
    /// `π/4 < τ < π/2` through the rotation to special Lagrangian.
    LargeTau,
    #[serde(rename = "LargeTau_printed")]
    LargeTauPrinted,
    #[serde(rename = "SL")]
    Sl,
    /// Any three-term equation.
    General,
}

impl FormulaId {
    pub fn as_str(self) -> &'static str {
        match self {
            FormulaId::Ma => "MA",
            FormulaId::SmallTau => "SmallTau",
            FormulaId::SmallTauPrinted => "SmallTau_printed",
            FormulaId::QuarterPiPaper => "QuarterPi_paper",
            FormulaId::QuarterPiDerivation => "QuarterPi_derivation",
            FormulaId::LargeTau => "LargeTau",
            FormulaId::LargeTauPrinted => "LargeTau_printed",
            FormulaId::Sl => "SL",
            FormulaId::General => "General",
        }
    }

    /// Formulas applicable to `eq`; the first one decides pass/fail.
    pub fn for_equation(eq: &Equation) -> Vec<FormulaId> {
        use FormulaId::*;
        match eq.tau_params().map(|p| p.branch) {
            Some(Branch::MA) => vec![Ma, General],
            Some(Branch::LogQuotient) => vec![SmallTau, SmallTauPrinted, General],
            Some(Branch::InverseHarmonic) => vec![QuarterPiDerivation, QuarterPiPaper, General],
            Some(Branch::ArctanQuotient) => vec![LargeTau, LargeTauPrinted, General],
            Some(Branch::SpecialLagrangian) => vec![Sl, General],
            None => vec![General],
        }
    }

    pub fn primary(eq: &Equation) -> FormulaId {
        Self::for_equation(eq)[0]
    }
}

/// Orientation of the normal used by the quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Normal {
    Outward,
    /// Flipped on the lower half circle; a negative control.
    BrokenHalf,
}

/// Elementary contour integrals `∮ F·ν ds` over `|x| = R`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ContourIntegrals {
    pub radius: f64,
    /// `u1 (u22, -u12)`.
    pub det: f64,
    /// `(u1, 0)`.
    pub u1: f64,
    /// `x1 (u22, -u12)`.
    pub x1_det: f64,
    /// `(x1, 0)`; equals the enclosed area.
    pub x1: f64,
    /// `∇u`.
    pub grad: f64,
    /// `(u22, -u12)`; vanishes for closed curves.
    pub hess_curl: f64,
    /// `(1, 1)`; vanishes for closed curves.
    pub constant: f64,
    /// `(1, 0)`; vanishes for closed curves.
    pub e1: f64,
}

impl ContourIntegrals {
    pub fn area(&self) -> f64 {
        PI * self.radius * self.radius
    }

    /// `∮ (u1 + μx1)(u22 + μ, -u12)·ν`.
    pub fn det_shift(&self, mu: f64) -> f64 {
        self.det + mu * (self.u1 + self.x1_det) + mu * mu * self.x1
    }
}

/// Trapezoidal contour integrals with `n` nodes.
pub fn contour_integrals(sol: &ExteriorSolution, radius: f64, n: usize, normal: Normal) -> Result<ContourIntegrals> {
    let mut c = ContourIntegrals {
        radius,
        ..Default::default()
    };
    let ds = 2.0 * PI * radius / n as f64;
    for j in 0..n {
        let th = 2.0 * PI * j as f64 / n as f64;
        let x = Vec2::polar(radius, th);
        let jet = sol.jet(x)?;
        let (g, h) = (jet.grad, jet.hess);
        let mut nu = Vec2::new(th.cos(), th.sin());
        if normal == Normal::BrokenHalf && th > PI {
            nu = -nu;
        }
        let curl = h.m22 * nu.x1 - h.m12 * nu.x2;
        c.det += ds * g.x1 * curl;
        c.u1 += ds * g.x1 * nu.x1;
        c.x1_det += ds * x.x1 * curl;
        c.x1 += ds * x.x1 * nu.x1;
        c.grad += ds * g.dot(nu);
        c.hess_curl += ds * curl;
        c.constant += ds * (nu.x1 + nu.x2);
        c.e1 += ds * nu.x1;
    }
    Ok(c)
}

/// Orientation `σ = ±1` of `c2 A + c1 I` for the normalized three-term form.
fn orientation(eq: &Equation, a: &Sym2) -> f64 {
    let f = eq.three_term();
    let l = a.eigen().lambda2;
    if f.c2 * l + f.c1 >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Value of formula `id` from the elementary integrals.
pub fn evaluate(id: FormulaId, eq: &Equation, anchor_a: &Sym2, c: &ContourIntegrals) -> Result<f64> {
    let not_applicable = || Error::InvalidArgument(format!("formula {} does not apply to {}", id.as_str(), eq.label()));
    if id == FormulaId::General {
        let f = eq.three_term();
        let disc = f.c1 * f.c1 - f.c0 * f.c2;
        if !(disc > 0.0) {
            return Err(Error::StructureViolation(format!("c1² - c0c2 = {disc}")));
        }
        let s = orientation(eq, anchor_a);
        return Ok(s * (f.c2 * c.det + f.c1 * c.grad + f.c0 * c.area()) / (4.0 * PI * disc.sqrt()));
    }
    let (p, c0) = match eq {
        Equation::Tau { params, c0 } => (*params, *c0),
        Equation::ThreeTerm(_) => return Err(not_applicable()),
    };
    let (a, b) = (p.a, p.b);
    let area = c.area();
    let d = match (id, p.branch) {
        (FormulaId::Ma, Branch::MA) => (c.det - (2.0 * c0).exp() * area) / (4.0 * PI * c0.exp()),
        (FormulaId::SmallTau | FormulaId::SmallTauPrinted, Branch::LogQuotient) => {
            let e = (b * c0 / (a * a + 1.0).sqrt()).exp();
            let v = c.det_shift(a - b) / e - e * c.det_shift(a + b);
            if id == FormulaId::SmallTau {
                v / (8.0 * PI * b)
            } else {
                v / (8.0 * PI)
            }
        }
        (FormulaId::QuarterPiDerivation, Branch::InverseHarmonic) => {
            -area / (2.0 * PI) - c.grad / (4.0 * PI) - 2f64.sqrt() * c0 / (8.0 * PI) * c.det_shift(1.0)
        }
        (FormulaId::QuarterPiPaper, Branch::InverseHarmonic) => {
            // (u1 + 1)(u22 + 1, -u12) and (u1 + 1, u2 + 1)
            let w = c.det + c.u1 + c.hess_curl + c.e1;
            area / (2.0 * PI) - 2f64.sqrt() * c0 / (8.0 * PI) * w + (c.grad + c.constant) / (4.0 * PI)
        }
        (FormulaId::LargeTau, Branch::ArctanQuotient) => {
            let th = b * c0 / (a * a + 1.0).sqrt() + PI / 2.0;
            let (s, co) = th.sin_cos();
            (co * (c.grad + 2.0 * a * area) + s / b * c.det_shift(a) - b * s * area) / (4.0 * PI)
        }
        (FormulaId::LargeTauPrinted, Branch::ArctanQuotient) => {
            let th = b * c0 / (a * a + 1.0).sqrt();
            let (s, co) = th.sin_cos();
            b / (4.0 * PI) * (co * (c.grad + 2.0 * a * area) + s * c.det_shift(a) - s * area)
        }
        (FormulaId::Sl, Branch::SpecialLagrangian) => {
            let (s, co) = c0.sin_cos();
            (co * c.grad + s * c.det - s * area) / (4.0 * PI)
        }
        _ => return Err(not_applicable()),
    };
    Ok(d)
}

/// One formula evaluated on one circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxEntry {
    pub formula: FormulaId,
    pub radius: f64,
    pub n_quad: usize,
    pub d: f64,
    /// Change when the node count is doubled.
    pub refinement_change: f64,
}

fn check_contour(sol: &ExteriorSolution, radius: f64, n_quad: usize) -> Result<()> {
    if n_quad < 64 {
        return Err(Error::InvalidArgument(format!("n_quad = {n_quad} must be at least 64")));
    }
    if !sol.in_domain(Vec2::new(radius, 0.0)) || sol.r_min >= radius {
        return Err(Error::DomainViolation(format!(
            "contour radius {radius} not inside the solution domain (r_min = {})",
            sol.r_min
        )));
    }
    Ok(())
}

/// Formula `id` on the circle of radius `radius`, with `n_quad` and
/// `2 n_quad` nodes; the finer value is returned.
pub fn flux_d(sol: &ExteriorSolution, id: FormulaId, radius: f64, n_quad: usize) -> Result<FluxEntry> {
    check_contour(sol, radius, n_quad)?;
    let a = sol.anchor().a;
    let coarse = evaluate(id, &sol.equation, &a, &contour_integrals(sol, radius, n_quad, Normal::Outward)?)?;
    let fine = evaluate(id, &sol.equation, &a, &contour_integrals(sol, radius, 2 * n_quad, Normal::Outward)?)?;
    let change = (fine - coarse).abs();
    if !fine.is_finite() || change > 1e-8 * (1.0 + fine.abs()) {
        return Err(Error::QuadratureStall {
            what: format!("flux formula {} at R = {radius}", id.as_str()),
            change,
        });
    }
    Ok(FluxEntry {
        formula: id,
        radius,
        n_quad,
        d: fine,
        refinement_change: change,
    })
}

/// The same formula over several contours.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxReport {
    pub formula_id: FormulaId,
    pub radii: Vec<f64>,
    pub d_values: Vec<f64>,
    pub spread: f64,
}

impl FluxReport {
    pub fn mean(&self) -> f64 {
        self.d_values.iter().sum::<f64>() / self.d_values.len() as f64
    }

    /// Contour independence: spread ≤ 1e-7 (1 + |d|).
    pub fn passes(&self) -> bool {
        self.spread <= 1e-7 * (1.0 + self.mean().abs())
    }
}

pub fn flux_independence(sol: &ExteriorSolution, id: FormulaId, radii: &[f64], n_quad: usize) -> Result<FluxReport> {
    if radii.len() < 3 {
        return Err(Error::InvalidArgument("contour independence needs at least 3 radii".into()));
    }
    let d_values = radii
        .iter()
        .map(|&r| Ok(flux_d(sol, id, r, n_quad)?.d))
        .collect::<Result<Vec<_>>>()?;
    let lo = d_values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = d_values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(FluxReport {
        formula_id: id,
        radii: radii.to_vec(),
        d_values,
        spread: hi - lo,
    })
}

/// Closed-curve identities realized by the quadrature, a negative control
/// with a broken normal, and the fundamental-solution flux.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSelfTest {
    pub radius: f64,
    pub n_quad: usize,
    pub hess_curl: f64,
    pub constant: f64,
    pub broken_hess_curl: f64,
    pub broken_constant: f64,
    /// `∮ (Q⁻¹∇Γ)·ν` for `Γ = d ln(xᵀQx)`.
    pub lemma_flux: f64,
    /// `4πd / det(Q^{1/2})`.
    pub lemma_expected: f64,
}

impl QuadratureSelfTest {
    pub fn identities_hold(&self) -> bool {
        self.hess_curl.abs() <= 1e-10 && self.constant.abs() <= 1e-10
    }

    pub fn control_detected(&self) -> bool {
        self.broken_hess_curl.abs() > 1e-10 || self.broken_constant.abs() > 1e-10
    }

    pub fn lemma_holds(&self) -> bool {
        (self.lemma_flux - self.lemma_expected).abs() <= 1e-10 * (1.0 + self.lemma_expected.abs())
    }

    pub fn passes(&self) -> bool {
        self.identities_hold() && self.control_detected() && self.lemma_holds()
    }
}

pub fn quadrature_selftests(
    sol: &ExteriorSolution,
    coeffs: &ExpansionCoeffs,
    radius: f64,
    n_quad: usize,
) -> Result<QuadratureSelfTest> {
    check_contour(sol, radius, n_quad)?;
    let good = contour_integrals(sol, radius, n_quad, Normal::Outward)?;
    let fine = contour_integrals(sol, radius, 2 * n_quad, Normal::Outward)?;
    let change = (good.hess_curl - fine.hess_curl).abs().max((good.constant - fine.constant).abs());
    if change > 1e-8 * (1.0 + good.hess_curl.abs()) {
        return Err(Error::QuadratureStall {
            what: "closed-curve identities".into(),
            change,
        });
    }
    let broken = contour_integrals(sol, radius, n_quad, Normal::BrokenHalf)?;
    let (q, d) = (coeffs.q, coeffs.d);
    let q_inv = q
        .inverse()
        .ok_or_else(|| Error::InvalidArgument("Q is singular".into()))?;
    let ds = 2.0 * PI * radius / n_quad as f64;
    let lemma_flux: f64 = (0..n_quad)
        .map(|j| {
            let th = 2.0 * PI * j as f64 / n_quad as f64;
            let x = Vec2::polar(radius, th);
            let grad = q.apply(x).scale(2.0 * d / q.quad_form(x));
            ds * q_inv.apply(grad).dot(Vec2::new(th.cos(), th.sin()))
        })
        .sum();
    Ok(QuadratureSelfTest {
        radius,
        n_quad,
        hess_curl: fine.hess_curl,
        constant: fine.constant,
        broken_hess_curl: broken.hess_curl,
        broken_constant: broken.constant,
        lemma_flux,
        lemma_expected: 4.0 * PI * d / q.det().sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{EquationSpec, GeneralCoeffs};
    use crate::solutions::{build, ma_radial_exact, quadratic_solution, radial_exact, SolutionDescriptor};

    fn tau_eq(tau: f64, c0: f64) -> Equation {
        Equation::tau(tau, c0).unwrap()
    }

    #[test]
    fn ma_family_value() {
        let s = ma_radial_exact(0.0, 1.0).unwrap();
        for r in [5.0, 10.0, 20.0] {
            let e = flux_d(&s, FormulaId::Ma, r, 256).unwrap();
            assert!((e.d - 0.25).abs() < 1e-12, "{}", e.d);
        }
    }

    #[test]
    fn quadratic_zero_for_consistent_formulas() {
        for (tau, a) in [
            (0.0, Sym2::new(2.0, 0.3, 1.0)),
            (0.3, Sym2::new(2.0, 0.3, 1.0)),
            (std::f64::consts::FRAC_PI_4, Sym2::new(2.0, 0.3, 1.0)),
            (1.2, Sym2::new(2.0, 0.3, 1.0)),
            (std::f64::consts::FRAC_PI_2, Sym2::new(2.0, 0.3, -0.5)),
        ] {
            let s = quadratic_solution(tau, a, Vec2::new(1.0, 2.0), 0.0).unwrap();
            for id in FormulaId::for_equation(&s.equation) {
                if matches!(id, FormulaId::QuarterPiPaper | FormulaId::LargeTauPrinted) {
                    continue;
                }
                let e = flux_d(&s, id, 3.0, 128).unwrap();
                assert!(e.d.abs() < 1e-11, "tau {tau} {}: {}", id.as_str(), e.d);
            }
        }
    }

    #[test]
    fn every_branch_matches_closed_form_truth() {
        for (tau, c0) in [(0.0, 0.3), (0.4, -0.2), (std::f64::consts::FRAC_PI_4, -1.0), (1.2, 0.3), (std::f64::consts::FRAC_PI_2, 1.0)] {
            let eq = tau_eq(tau, c0);
            let s = radial_exact(&eq, 0.7, 2.0).unwrap();
            let want = s.truth.unwrap().d;
            let ids = FormulaId::for_equation(&eq);
            for id in [ids[0], FormulaId::General] {
                let e = flux_d(&s, id, 5.0, 256).unwrap();
                assert!((e.d - want).abs() < 1e-11, "tau {tau} {}: {} vs {want}", id.as_str(), e.d);
            }
        }
    }

    #[test]
    fn general_formula_on_three_term() {
        let spec = EquationSpec::ThreeTerm { c0: 0.0, c1: 1.0, c2: 1.0 };
        let s = build(&SolutionDescriptor::RadialExact { equation: spec, k: 0.5, r_min: 2.0 }).unwrap();
        let want = s.truth.unwrap().d;
        let e = flux_d(&s, FormulaId::General, 4.0, 128).unwrap();
        assert!((e.d - want).abs() < 1e-11);
        let _ = GeneralCoeffs::new(0.0, 1.0, 1.0).unwrap();
    }

    #[test]
    fn selftests_and_control() {
        let s = ma_radial_exact(0.0, 1.0).unwrap();
        let t = quadrature_selftests(&s, &s.truth.unwrap(), 5.0, 128).unwrap();
        assert!(t.identities_hold() && t.control_detected() && t.lemma_holds(), "{t:?}");
    }

    #[test]
    fn contour_inside_hole_rejected() {
        let s = ma_radial_exact(0.0, 1.0).unwrap();
        assert!(matches!(flux_d(&s, FormulaId::Ma, 0.5, 128), Err(Error::DomainViolation(_))));
    }
}
