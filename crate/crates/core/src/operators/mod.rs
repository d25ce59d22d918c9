//! Hessian-eigenvalue operators: the F_τ family and three-term equations.

pub mod general;
pub mod linalg;
pub mod tau;

use serde::{Deserialize, Serialize};

pub use general::{general_normalize, GeneralCoeffs, ThreeTermForm};
pub use linalg::{eigen_sym2, Mat2, Sym2, SymEigen, Vec2};
pub use tau::{
    arctan_identity_gap, arctan_identity_gap_pair, df_matrix, df_tau, df_tau_unified, f_tau,
    partner_deviation, q_matrix, solve_partner_eigenvalue, Admissibility, Branch, TauParams,
};

use crate::error::{Error, Result};

/// A fully specified equation `F(λ(D²u)) = const`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Equation {
    /// `F_τ(λ) = c0`.
    Tau { params: TauParams, c0: f64 },
    /// `c2 λ1λ2 + c1(λ1+λ2) + c0 = 0`, solutions with `D²u > -(c1/c2)I`
    /// when `c2 > 0`.
    ThreeTerm(GeneralCoeffs),
}

/// Serializable form of [`Equation`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EquationSpec {
    Tau { tau: f64, c0: f64 },
    ThreeTerm { c0: f64, c1: f64, c2: f64 },
}

impl EquationSpec {
    pub fn build(&self) -> Result<Equation> {
        match *self {
            EquationSpec::Tau { tau, c0 } => Equation::tau(tau, c0),
            EquationSpec::ThreeTerm { c0, c1, c2 } => {
                Ok(Equation::ThreeTerm(GeneralCoeffs::new(c0, c1, c2)?))
            }
        }
    }
}

impl Equation {
    pub fn tau(tau: f64, c0: f64) -> Result<Self> {
        let params = TauParams::new(tau)?;
        params.check_c0(c0)?;
        Ok(Equation::Tau { params, c0 })
    }

    pub fn spec(&self) -> EquationSpec {
        match *self {
            Equation::Tau { params, c0 } => EquationSpec::Tau { tau: params.tau, c0 },
            Equation::ThreeTerm(g) => EquationSpec::ThreeTerm { c0: g.c0, c1: g.c1, c2: g.c2 },
        }
    }

    pub fn label(&self) -> String {
        match self {
            Equation::Tau { params, c0 } => format!("{} tau={} C0={}", params.branch, params.tau, c0),
            Equation::ThreeTerm(g) => format!("three-term c0={} c1={} c2={}", g.c0, g.c1, g.c2),
        }
    }

    pub fn tau_params(&self) -> Option<TauParams> {
        match self {
            Equation::Tau { params, .. } => Some(*params),
            Equation::ThreeTerm(_) => None,
        }
    }

    /// Right-hand side constant (0 for the three-term form).
    pub fn target(&self) -> f64 {
        match self {
            Equation::Tau { c0, .. } => *c0,
            Equation::ThreeTerm(_) => 0.0,
        }
    }

    pub fn value(&self, l1: f64, l2: f64) -> Result<f64> {
        match self {
            Equation::Tau { params, .. } => f_tau(params, l1, l2),
            Equation::ThreeTerm(g) => Ok(g.form().eval(l1, l2)),
        }
    }

    /// `F(λ(H)) - target`.
    pub fn residual(&self, h: &Sym2) -> Result<f64> {
        let e = h.eigen();
        Ok(self.value(e.lambda1, e.lambda2)? - self.target())
    }

    /// `∂F/∂λ1, ∂F/∂λ2`.
    pub fn eigen_gradient(&self, l1: f64, l2: f64) -> Result<(f64, f64)> {
        match self {
            Equation::Tau { params, .. } => Ok((df_tau(params, l1)?, df_tau(params, l2)?)),
            Equation::ThreeTerm(g) => Ok((g.c2 * l2 + g.c1, g.c2 * l1 + g.c1)),
        }
    }

    /// DF(A) as a matrix on A's eigenframe.
    pub fn df_matrix(&self, a: &Sym2) -> Result<Sym2> {
        let e = a.eigen();
        let (g1, g2) = self.eigen_gradient(e.lambda1, e.lambda2)?;
        let rot = e.frame();
        // frame's first column is the λ2 eigenvector
        Ok(rot.congruence(&Sym2::diag(g2, g1)))
    }

    /// Canonical Q. For F_τ this is ½(sin τ A² + 2 cos τ A + sin τ I); for the
    /// three-term form it is ½(DF(A))⁻¹ = (c2 A + c1 I) / (2(c1² - c0 c2)).
    pub fn q_matrix(&self, a: &Sym2) -> Result<Sym2> {
        match self {
            Equation::Tau { params, .. } => q_matrix(params, a),
            Equation::ThreeTerm(g) => {
                let (_, p) = general_normalize(g)?;
                let q = a.scale(g.c2).add_scalar(g.c1).scale(0.5 / (p * g.c2 * g.c2));
                if !q.is_positive_definite() {
                    return Err(Error::InadmissibleEigenvalues {
                        lambda1: a.eigen().lambda1,
                        lambda2: a.eigen().lambda2,
                        branch: "three-term (c2 A + c1 I not positive)",
                    });
                }
                Ok(q)
            }
        }
    }

    /// Three-term coefficients of the same equation, normalized so `c2 ≥ 0`.
    pub fn three_term(&self) -> ThreeTermForm {
        let f = match self {
            Equation::Tau { params, c0 } => params.three_term(*c0),
            Equation::ThreeTerm(g) => g.form(),
        };
        if f.c2 < 0.0 {
            ThreeTermForm::new(-f.c0, -f.c1, -f.c2)
        } else {
            f
        }
    }

    /// The isotropic eigenvalue α with F(α, α) = target, on the convex
    /// component for three-term equations.
    pub fn isotropic_eigenvalue(&self) -> Result<f64> {
        match self {
            Equation::Tau { params, c0 } => params.isotropic_eigenvalue(*c0),
            Equation::ThreeTerm(g) => {
                let (s, p) = general_normalize(g)?;
                Ok(g.c2.signum() * p.sqrt() - s)
            }
        }
    }

    /// Isotropic eigenvalue written as `σ√P - s` from the three-term form, so
    /// that closed-form radial offsets are exact relative to it.
    pub fn anchor_eigenvalue(&self) -> Result<f64> {
        let alpha = self.isotropic_eigenvalue()?;
        match self.three_term().shift_product() {
            Some((s, p)) if p > 0.0 => Ok((alpha + s).signum() * p.sqrt() - s),
            _ => Ok(alpha),
        }
    }

    pub fn is_admissible(&self, l: f64) -> bool {
        match self {
            Equation::Tau { params, .. } => params.is_admissible(l),
            Equation::ThreeTerm(g) => l.is_finite() && (g.c2 * l + g.c1) / g.c2.abs() > 0.0,
        }
    }

    /// The eigenvalue λ with F(known, λ) = target.
    pub fn partner(&self, known: f64) -> Result<f64> {
        match self {
            Equation::Tau { params, c0 } => solve_partner_eigenvalue(params, *c0, known),
            Equation::ThreeTerm(g) => {
                let den = g.c2 * known + g.c1;
                if den == 0.0 || !self.is_admissible(known) {
                    return Err(Error::NoAdmissiblePartner {
                        target: known,
                        lo: f64::NEG_INFINITY,
                        hi: f64::INFINITY,
                    });
                }
                Ok(-(g.c1 * known + g.c0) / den)
            }
        }
    }

    /// `g(α+δ) - α`, with `g` the partner map and α the isotropic eigenvalue.
    pub fn partner_deviation(&self, alpha: f64, delta: f64) -> Result<f64> {
        if let Some(d) = self.three_term().deviation(alpha, delta) {
            return Ok(d);
        }
        Ok(self.partner(alpha + delta)? - alpha)
    }

    /// `δ + g(α+δ) - α`, which is `O(δ²)`; computed without cancellation.
    pub fn deviation_sum(&self, alpha: f64, delta: f64) -> Result<f64> {
        let f = self.three_term();
        if f.c2 != 0.0 {
            let m = alpha + f.c1 / f.c2;
            if m != 0.0 && delta.abs() <= 0.5 * m.abs() {
                return Ok(delta * delta / (m + delta));
            }
        } else if f.c1 != 0.0 {
            return Ok(0.0);
        }
        Ok(delta + self.partner(alpha + delta)? - alpha)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn random_admissible(p: &TauParams, u: f64, v: f64, angle: f64) -> Sym2 {
        let lo = p.admissibility().lower_bound.unwrap_or(-10.0);
        let l1 = lo + 0.05 + 10.0 * u;
        let l2 = lo + 0.05 + 10.0 * v;
        Mat2::rotation(angle).congruence(&Sym2::diag(l1, l2))
    }

    #[test]
    fn equation_three_term_matches_tau() {
        for tau in [0.0, 0.3, PI / 4.0, 1.1, FRAC_PI_2] {
            let p = TauParams::new(tau).unwrap();
            let a = random_admissible(&p, 0.3, 0.6, 0.4);
            let e = a.eigen();
            let c0 = f_tau(&p, e.lambda1, e.lambda2).unwrap();
            let eq = Equation::tau(tau, c0).unwrap();
            let f = eq.three_term();
            assert!(f.c2 >= 0.0);
            assert!(f.eval(e.lambda1, e.lambda2).abs() < 1e-10 * (1.0 + f.c0.abs()));
        }
    }

    #[test]
    fn three_term_q_is_half_inverse_df() {
        let g = GeneralCoeffs::new(0.0, 1.0, 1.0).unwrap();
        let eq = Equation::ThreeTerm(g);
        // (λ1+1)(λ2+1) = 1
        let a = Mat2::rotation(0.7).congruence(&Sym2::diag(0.5, 1.0 / 1.5 - 1.0));
        let q = eq.q_matrix(&a).unwrap();
        let df = eq.df_matrix(&a).unwrap();
        let prod = q.to_mat() * df.to_mat();
        assert!((prod.a11 - 0.5).abs() < 1e-12 && prod.a12.abs() < 1e-12);
        assert!(prod.a21.abs() < 1e-12 && (prod.a22 - 0.5).abs() < 1e-12);
    }

    #[test]
    fn deviation_sum_small() {
        let eq = Equation::tau(PI / 6.0, -1.0).unwrap();
        let alpha = eq.isotropic_eigenvalue().unwrap();
        let d = 1e-9;
        let s = eq.deviation_sum(alpha, d).unwrap();
        assert!(s.abs() < 1e-16 && s > 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn q_times_df_is_half(tau in 0.0..FRAC_PI_2, u in 0.0f64..1.0, v in 0.0f64..1.0, ang in 0.0..PI) {
            let p = TauParams::new(tau).unwrap();
            let a = random_admissible(&p, u, v, ang);
            let q = q_matrix(&p, &a).unwrap();
            let df = df_matrix(&p, &a).unwrap();
            let prod = q.to_mat() * df.to_mat();
            prop_assert!((prod.a11 - 0.5).abs() < 1e-12);
            prop_assert!((prod.a22 - 0.5).abs() < 1e-12);
            prop_assert!(prod.a12.abs() < 1e-12 && prod.a21.abs() < 1e-12);
            prop_assert!(q.is_positive_definite());
        }

        #[test]
        fn q_commutes_with_rotation(tau in 0.0..FRAC_PI_2, u in 0.0f64..1.0, v in 0.0f64..1.0, ang in 0.0..PI, rot in 0.0..(2.0 * PI)) {
            let p = TauParams::new(tau).unwrap();
            let a = random_admissible(&p, u, v, ang);
            let o = Mat2::rotation(rot);
            let lhs = q_matrix(&p, &o.congruence_t(&a)).unwrap();
            let rhs = o.congruence_t(&q_matrix(&p, &a).unwrap());
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12 * (1.0 + rhs.max_abs()));
        }

        #[test]
        fn equation_df_matches_tau_df(tau in 0.0..FRAC_PI_2, u in 0.0f64..1.0, v in 0.0f64..1.0, ang in 0.0..PI) {
            let p = TauParams::new(tau).unwrap();
            let a = random_admissible(&p, u, v, ang);
            let e = a.eigen();
            let c0 = f_tau(&p, e.lambda1, e.lambda2).unwrap();
            prop_assume!(p.check_c0(c0).is_ok());
            let eq = Equation::Tau { params: p, c0 };
            let m1 = eq.df_matrix(&a).unwrap();
            let m2 = df_matrix(&p, &a).unwrap();
            prop_assert!(m1.max_abs_diff(&m2) < 1e-12 * (1.0 + m2.max_abs()));
        }
    }
}
