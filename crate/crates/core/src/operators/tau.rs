//! The F_τ operator family, τ ∈ [0, π/2].
//!
//! Each branch is a sum `φ(λ1) + φ(λ2)` of one strictly increasing
//! single-eigenvalue term, so derivatives and partner eigenvalues are
//! available in closed form.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, SQRT_2};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::general::ThreeTermForm;
use super::linalg::Sym2;
use crate::error::{Error, Result};

/// Distance below which τ is snapped onto 0, π/4 or π/2.
const SNAP: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    /// τ = 0, Monge–Ampère.
    MA,
    /// 0 < τ < π/4.
    LogQuotient,
    /// τ = π/4.
    InverseHarmonic,
    /// π/4 < τ < π/2.
    ArctanQuotient,
    /// τ = π/2.
    SpecialLagrangian,
}

impl Branch {
    pub fn name(self) -> &'static str {
        match self {
            Branch::MA => "MA",
            Branch::LogQuotient => "LogQuotient",
            Branch::InverseHarmonic => "InverseHarmonic",
            Branch::ArctanQuotient => "ArctanQuotient",
            Branch::SpecialLagrangian => "SpecialLagrangian",
        }
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Eigenvalue lower bound of the semi-convex admissibility condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Admissibility {
    /// Strict lower bound for each eigenvalue; `None` at τ = π/2.
    pub lower_bound: Option<f64>,
    /// τ = π/2 requires C0 ≠ 0 instead of an eigenvalue bound.
    pub c0_nonzero_required: bool,
}

/// A value of τ together with the derived `a = cot τ`, `b = sqrt|cot²τ - 1|`.
///
/// At τ = 0 both `a` and `b` are stored as +∞ and never read.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauParams {
    pub tau: f64,
    pub a: f64,
    pub b: f64,
    pub branch: Branch,
}

impl TauParams {
    pub fn new(tau: f64) -> Result<Self> {
        if !tau.is_finite() || tau < -SNAP || tau > FRAC_PI_2 + SNAP {
            return Err(Error::InvalidArgument(format!(
                "tau = {tau} outside [0, pi/2]"
            )));
        }
        let p = if tau.abs() <= SNAP {
            TauParams {
                tau: 0.0,
                a: f64::INFINITY,
                b: f64::INFINITY,
                branch: Branch::MA,
            }
        } else if (tau - FRAC_PI_4).abs() <= SNAP {
            TauParams {
                tau: FRAC_PI_4,
                a: 1.0,
                b: 0.0,
                branch: Branch::InverseHarmonic,
            }
        } else if (tau - FRAC_PI_2).abs() <= SNAP {
            TauParams {
                tau: FRAC_PI_2,
                a: 0.0,
                b: 1.0,
                branch: Branch::SpecialLagrangian,
            }
        } else {
            let a = 1.0 / tau.tan();
            let b = (a * a - 1.0).abs().sqrt();
            let branch = if tau < FRAC_PI_4 {
                Branch::LogQuotient
            } else {
                Branch::ArctanQuotient
            };
            TauParams { tau, a, b, branch }
        };
        Ok(p)
    }

    pub fn ma() -> Self {
        Self::new(0.0).unwrap()
    }

    pub fn special_lagrangian() -> Self {
        Self::new(FRAC_PI_2).unwrap()
    }

    pub fn inverse_harmonic() -> Self {
        Self::new(FRAC_PI_4).unwrap()
    }

    pub fn admissibility(&self) -> Admissibility {
        let lower_bound = match self.branch {
            Branch::MA => Some(0.0),
            Branch::LogQuotient => Some(-self.a + self.b),
            Branch::InverseHarmonic => Some(-1.0),
            Branch::ArctanQuotient => Some(-(self.a + self.b)),
            Branch::SpecialLagrangian => None,
        };
        Admissibility {
            lower_bound,
            c0_nonzero_required: self.branch == Branch::SpecialLagrangian,
        }
    }

    pub fn is_admissible(&self, lambda: f64) -> bool {
        lambda.is_finite()
            && match self.admissibility().lower_bound {
                Some(lb) => lambda > lb,
                None => true,
            }
    }

    fn check(&self, lambda1: f64, lambda2: f64) -> Result<()> {
        if self.is_admissible(lambda1) && self.is_admissible(lambda2) {
            Ok(())
        } else {
            Err(Error::InadmissibleEigenvalues {
                lambda1,
                lambda2,
                branch: self.branch.name(),
            })
        }
    }

    /// `sqrt(a² + 1) = 1/sin τ`.
    fn norm_ab(&self) -> f64 {
        (self.a * self.a + 1.0).sqrt()
    }

    /// Single-eigenvalue term; F_τ(λ) = φ(λ1) + φ(λ2). No admissibility check.
    fn phi(&self, l: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        match self.branch {
            Branch::MA => 0.5 * l.ln(),
            Branch::LogQuotient => {
                self.norm_ab() / (2.0 * b) * ((l + a - b) / (l + a + b)).ln()
            }
            Branch::InverseHarmonic => -SQRT_2 / (1.0 + l),
            Branch::ArctanQuotient => self.norm_ab() / b * ((l + a - b) / (l + a + b)).atan(),
            Branch::SpecialLagrangian => l.atan(),
        }
    }

    fn dphi(&self, l: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        match self.branch {
            Branch::MA => 0.5 / l,
            Branch::LogQuotient => {
                self.norm_ab() / (2.0 * b) * (1.0 / (l + a - b) - 1.0 / (l + a + b))
            }
            Branch::InverseHarmonic => SQRT_2 / ((1.0 + l) * (1.0 + l)),
            Branch::ArctanQuotient => {
                let p = l + a + b;
                let m = l + a - b;
                self.norm_ab() / b * 2.0 * b / (p * p + m * m)
            }
            Branch::SpecialLagrangian => 1.0 / (1.0 + l * l),
        }
    }

    /// Open interval of values attained by `φ` on admissible eigenvalues.
    fn phi_range(&self) -> (f64, f64) {
        match self.branch {
            Branch::MA => (f64::NEG_INFINITY, f64::INFINITY),
            Branch::LogQuotient | Branch::InverseHarmonic => (f64::NEG_INFINITY, 0.0),
            Branch::ArctanQuotient => {
                let k = self.norm_ab() / self.b;
                (-k * FRAC_PI_2, k * FRAC_PI_4)
            }
            Branch::SpecialLagrangian => (-FRAC_PI_2, FRAC_PI_2),
        }
    }

    /// Inverse of `φ` on its range.
    fn phi_inverse(&self, t: f64) -> Result<f64> {
        let (lo, hi) = self.phi_range();
        if !(t > lo && t < hi) {
            return Err(Error::NoAdmissiblePartner { target: t, lo, hi });
        }
        let (a, b) = (self.a, self.b);
        let l = match self.branch {
            Branch::MA => (2.0 * t).exp(),
            Branch::LogQuotient => {
                let k = self.norm_ab() / (2.0 * b);
                let z = (t / k).exp();
                let one_minus_z = -(t / k).exp_m1();
                (z * (a + b) - (a - b)) / one_minus_z
            }
            Branch::InverseHarmonic => -SQRT_2 / t - 1.0,
            Branch::ArctanQuotient => {
                let k = self.norm_ab() / b;
                let z = (t / k).tan();
                2.0 * b / (1.0 - z) - a - b
            }
            Branch::SpecialLagrangian => t.tan(),
        };
        Ok(l)
    }

    /// Range of C0 reachable by admissible eigenvalue pairs.
    pub fn c0_range(&self) -> (f64, f64) {
        let (lo, hi) = self.phi_range();
        (2.0 * lo, 2.0 * hi)
    }

    /// Checks that `c0` is reachable (and nonzero at τ = π/2).
    pub fn check_c0(&self, c0: f64) -> Result<()> {
        let (lo, hi) = self.c0_range();
        if !(c0 > lo && c0 < hi) {
            return Err(Error::RangeExceeded {
                c0,
                reason: format!("{} branch attains only ({lo}, {hi})", self.branch),
            });
        }
        if self.branch == Branch::SpecialLagrangian && c0 == 0.0 {
            return Err(Error::RangeExceeded {
                c0,
                reason: "tau = pi/2 requires C0 != 0".into(),
            });
        }
        Ok(())
    }

    /// The eigenvalue α with F_τ(α, α) = C0.
    pub fn isotropic_eigenvalue(&self, c0: f64) -> Result<f64> {
        self.check_c0(c0)?;
        self.phi_inverse(0.5 * c0)
    }

    /// The same equation as a three-term equation
    /// `c2 λ1λ2 + c1(λ1+λ2) + c0 = 0` (valid on the admissible region).
    pub fn three_term(&self, c0: f64) -> ThreeTermForm {
        let (a, b) = (self.a, self.b);
        match self.branch {
            Branch::MA => ThreeTermForm::new(-(2.0 * c0).exp(), 0.0, 1.0),
            Branch::LogQuotient => {
                let c = (2.0 * b * c0 / self.norm_ab()).exp();
                let (m, p) = (a - b, a + b);
                ThreeTermForm::new(m * m - c * p * p, m - c * p, 1.0 - c)
            }
            Branch::InverseHarmonic => {
                let k = c0 / SQRT_2;
                ThreeTermForm::new(k + 2.0, k + 1.0, k)
            }
            Branch::ArctanQuotient => {
                let theta = b * c0 / self.norm_ab() + FRAC_PI_2;
                let (s, c) = theta.sin_cos();
                ThreeTermForm::new(a * a * s + 2.0 * a * b * c - b * b * s, a * s + b * c, s)
            }
            Branch::SpecialLagrangian => {
                let (s, c) = c0.sin_cos();
                ThreeTermForm::new(-s, c, s)
            }
        }
    }
}

/// F_τ(λ1, λ2).
pub fn f_tau(p: &TauParams, lambda1: f64, lambda2: f64) -> Result<f64> {
    p.check(lambda1, lambda2)?;
    Ok(p.phi(lambda1) + p.phi(lambda2))
}

/// Derivative of F_τ with respect to one eigenvalue.
pub fn df_tau(p: &TauParams, lambda: f64) -> Result<f64> {
    p.check(lambda, lambda)?;
    Ok(p.dphi(lambda))
}

/// `1 / (sin τ λ² + 2 cos τ λ + sin τ)`, the branch-free form of `df_tau`.
pub fn df_tau_unified(p: &TauParams, lambda: f64) -> f64 {
    let (s, c) = p.tau.sin_cos();
    1.0 / (s * lambda * lambda + 2.0 * c * lambda + s)
}

/// DF_τ(A) as a symmetric matrix on A's eigenframe.
pub fn df_matrix(p: &TauParams, a: &Sym2) -> Result<Sym2> {
    let e = a.eigen();
    p.check(e.lambda1, e.lambda2)?;
    Ok(e.map(|l| p.dphi(l)))
}

/// Canonical Q = ½(sin τ A² + 2 cos τ A + sin τ I).
pub fn q_matrix(p: &TauParams, a: &Sym2) -> Result<Sym2> {
    let e = a.eigen();
    p.check(e.lambda1, e.lambda2)?;
    let (s, c) = p.tau.sin_cos();
    let s = if p.branch == Branch::MA { 0.0 } else { s };
    Ok(e.map(|l| 0.5 * (s * l * l + 2.0 * c * l + s)))
}

/// The eigenvalue λ with F_τ(λ_known, λ) = C0.
pub fn solve_partner_eigenvalue(p: &TauParams, c0: f64, lambda_known: f64) -> Result<f64> {
    p.check(lambda_known, lambda_known)?;
    p.phi_inverse(c0 - p.phi(lambda_known))
}

/// Per-eigenvalue form of the arctan identity on π/4 < τ < π/2:
/// `arctan((λ+a-b)/(λ+a+b)) - [arctan((λ+a)/b) - π/4]`.
pub fn arctan_identity_gap(p: &TauParams, lambda: f64) -> Result<f64> {
    if p.branch != Branch::ArctanQuotient {
        return Err(Error::InvalidArgument(format!(
            "arctan identity needs the ArctanQuotient branch, got {}",
            p.branch
        )));
    }
    p.check(lambda, lambda)?;
    let (a, b) = (p.a, p.b);
    Ok(((lambda + a - b) / (lambda + a + b)).atan() - ((lambda + a) / b).atan() + FRAC_PI_4)
}

/// Summed form of the identity: Σ arctan((λi+a-b)/(λi+a+b)) - [Σ arctan((λi+a)/b) - π/2].
pub fn arctan_identity_gap_pair(p: &TauParams, lambda1: f64, lambda2: f64) -> Result<f64> {
    Ok(arctan_identity_gap(p, lambda1)? + arctan_identity_gap(p, lambda2)?)
}

/// Numerically stable `g(α+δ) - α`, where `g` is the partner map at level C0
/// and α the isotropic eigenvalue.
pub fn partner_deviation(p: &TauParams, c0: f64, alpha: f64, delta: f64) -> Result<f64> {
    let form = p.three_term(c0);
    if let Some(dev) = form.deviation(alpha, delta) {
        return Ok(dev);
    }
    Ok(solve_partner_eigenvalue(p, c0, alpha + delta)? - alpha)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn all_taus() -> Vec<f64> {
        vec![0.0, PI / 8.0, PI / 6.0, FRAC_PI_4, PI / 3.0, 3.0 * PI / 8.0, FRAC_PI_2]
    }

    #[test]
    fn branch_selection() {
        assert_eq!(TauParams::new(0.0).unwrap().branch, Branch::MA);
        assert_eq!(TauParams::new(0.3).unwrap().branch, Branch::LogQuotient);
        assert_eq!(TauParams::new(FRAC_PI_4).unwrap().branch, Branch::InverseHarmonic);
        assert_eq!(TauParams::new(1.0).unwrap().branch, Branch::ArctanQuotient);
        assert_eq!(TauParams::new(FRAC_PI_2).unwrap().branch, Branch::SpecialLagrangian);
        assert!(TauParams::new(2.0).is_err());
        assert!(TauParams::new(-0.1).is_err());
    }

    #[test]
    fn ab_relations() {
        for tau in [0.1, 0.4, PI / 6.0, 0.78] {
            let p = TauParams::new(tau).unwrap();
            assert!((p.a * p.a - p.b * p.b - 1.0).abs() < 1e-12);
        }
        for tau in [0.8, PI / 3.0, 1.2, 1.5] {
            let p = TauParams::new(tau).unwrap();
            assert!((p.a * p.a + p.b * p.b - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn f_tau_examples() {
        assert_eq!(f_tau(&TauParams::ma(), 1.0, 1.0).unwrap(), 0.0);
        let sl = f_tau(&TauParams::special_lagrangian(), 1.0, 1.0).unwrap();
        assert!((sl - FRAC_PI_2).abs() < 1e-15);
        let ih = f_tau(&TauParams::inverse_harmonic(), 0.0, 0.0).unwrap();
        assert!((ih + 2.0 * SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn f_tau_rejects_inadmissible() {
        assert!(f_tau(&TauParams::ma(), -1.0, 1.0).is_err());
        assert!(f_tau(&TauParams::inverse_harmonic(), -1.0, 0.0).is_err());
        let p = TauParams::new(PI / 6.0).unwrap();
        assert!(f_tau(&p, -p.a + p.b, 1.0).is_err());
        let p = TauParams::new(PI / 3.0).unwrap();
        assert!(f_tau(&p, -(p.a + p.b) - 1e-9, 1.0).is_err());
        assert!(f_tau(&TauParams::special_lagrangian(), -50.0, 3.0).is_ok());
    }

    #[test]
    fn df_tau_examples() {
        assert!((df_tau(&TauParams::ma(), 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((df_tau(&TauParams::special_lagrangian(), 1.0).unwrap() - 0.5).abs() < 1e-15);
        let v = df_tau(&TauParams::inverse_harmonic(), 1.0).unwrap();
        assert!((v - SQRT_2 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn q_matrix_examples() {
        let q = q_matrix(&TauParams::ma(), &Sym2::IDENTITY).unwrap();
        assert!(q.max_abs_diff(&Sym2::IDENTITY) < 1e-15);
        let q = q_matrix(&TauParams::special_lagrangian(), &Sym2::ZERO).unwrap();
        assert!(q.max_abs_diff(&Sym2::scalar(0.5)) < 1e-15);
        let q = q_matrix(&TauParams::inverse_harmonic(), &Sym2::diag(1.0, 3.0)).unwrap();
        assert!(q.max_abs_diff(&Sym2::diag(SQRT_2, 4.0 * SQRT_2)) < 1e-14);
    }

    #[test]
    fn partner_examples() {
        let l = solve_partner_eigenvalue(&TauParams::special_lagrangian(), FRAC_PI_2, 1.0).unwrap();
        assert!((l - 1.0).abs() < 1e-12);
        let l = solve_partner_eigenvalue(&TauParams::ma(), 0.0, 2.0).unwrap();
        assert!((l - 0.5).abs() < 1e-12);
        let l = solve_partner_eigenvalue(&TauParams::inverse_harmonic(), -SQRT_2, 1.0).unwrap();
        assert!((l - 1.0).abs() < 1e-12);
    }

    #[test]
    fn partner_out_of_range() {
        // arctan 1 + arctan λ < π/4 + π/2
        let r = solve_partner_eigenvalue(&TauParams::special_lagrangian(), 2.5, 1.0);
        assert!(matches!(r, Err(Error::NoAdmissiblePartner { .. })));
        let r = solve_partner_eigenvalue(&TauParams::inverse_harmonic(), 0.5, 1.0);
        assert!(matches!(r, Err(Error::NoAdmissiblePartner { .. })));
    }

    #[test]
    fn arctan_gap_examples() {
        let p = TauParams::new(PI / 3.0).unwrap();
        assert!(arctan_identity_gap(&p, 0.0).unwrap().abs() < 1e-12);
        for tau in [0.8, 1.0, 1.3, 1.5] {
            let p = TauParams::new(tau).unwrap();
            assert!(arctan_identity_gap(&p, 1.0).unwrap().abs() < 1e-12);
        }
        let p = TauParams::new(3.0 * PI / 8.0).unwrap();
        assert!(arctan_identity_gap(&p, 10.0).unwrap().abs() < 1e-12);
        assert!(arctan_identity_gap_pair(&p, 10.0, -0.2).unwrap().abs() < 1e-12);
        assert!(arctan_identity_gap(&TauParams::ma(), 1.0).is_err());
    }

    #[test]
    fn three_term_forms_match_branches() {
        for tau in all_taus() {
            let p = TauParams::new(tau).unwrap();
            let lo = p.admissibility().lower_bound.unwrap_or(-3.0);
            for &(l1, l2) in &[(lo + 0.3, lo + 2.0), (lo + 1.0, lo + 1.0), (lo + 0.05, lo + 7.0)] {
                let c0 = f_tau(&p, l1, l2).unwrap();
                let form = p.three_term(c0);
                let r = form.c2 * l1 * l2 + form.c1 * (l1 + l2) + form.c0;
                let scale = form.c2.abs() * l1.abs() * l2.abs() + form.c1.abs() * (l1.abs() + l2.abs()) + form.c0.abs();
                assert!(r.abs() <= 1e-12 * (1.0 + scale), "tau {tau}: residual {r}");
            }
        }
    }

    #[test]
    fn partner_deviation_matches_direct() {
        for tau in all_taus() {
            let p = TauParams::new(tau).unwrap();
            let lo = p.admissibility().lower_bound.unwrap_or(-3.0);
            let alpha = lo + 1.5;
            let c0 = f_tau(&p, alpha, alpha).unwrap();
            for delta in [1e-9, -1e-6, 1e-3, 0.2, -0.4] {
                let fast = partner_deviation(&p, c0, alpha, delta).unwrap();
                let direct = solve_partner_eigenvalue(&p, c0, alpha + delta).unwrap() - alpha;
                assert!(
                    (fast - direct).abs() <= 1e-12 * (1.0 + alpha.abs()),
                    "tau {tau} delta {delta}: {fast} vs {direct}"
                );
            }
        }
    }

    fn admissible_lambda(p: &TauParams, u: f64) -> f64 {
        // maps u in (0,1) into the admissible half-line, keeping a margin
        let lo = p.admissibility().lower_bound.unwrap_or(-20.0);
        lo + 0.05 + 20.0 * u
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn derivative_matches_finite_difference(tau in 0.0..FRAC_PI_2, u in 0.0f64..1.0) {
            let p = TauParams::new(tau).unwrap();
            let l = admissible_lambda(&p, u);
            let h = 1e-5 * (1.0 + l.abs());
            let fd = (p.phi(l + h) - p.phi(l - h)) / (2.0 * h);
            let exact = df_tau(&p, l).unwrap();
            prop_assert!(((fd - exact) / exact).abs() < 1e-7, "fd {} exact {}", fd, exact);
        }

        #[test]
        fn unified_derivative(tau in 0.0..FRAC_PI_2, u in 0.0f64..1.0) {
            let p = TauParams::new(tau).unwrap();
            let l = admissible_lambda(&p, u);
            let prod = df_tau(&p, l).unwrap() / df_tau_unified(&p, l);
            prop_assert!((prod - 1.0).abs() < 1e-12);
        }

        #[test]
        fn partner_is_inverse(tau in 0.0..FRAC_PI_2, u in 0.0f64..1.0, v in 0.0f64..1.0) {
            let p = TauParams::new(tau).unwrap();
            let l1 = admissible_lambda(&p, u);
            let l2 = admissible_lambda(&p, v);
            let c0 = f_tau(&p, l1, l2).unwrap();
            let back = solve_partner_eigenvalue(&p, c0, l1).unwrap();
            let f = f_tau(&p, l1, back).unwrap();
            prop_assert!((f - c0).abs() < 1e-12 * (1.0 + c0.abs()));
        }

        #[test]
        fn arctan_gap_small(tau in 0.7854f64..1.5707, u in 0.0f64..1.0) {
            let p = TauParams::new(tau).unwrap();
            prop_assume!(p.branch == Branch::ArctanQuotient);
            let l = admissible_lambda(&p, u);
            prop_assert!(arctan_identity_gap(&p, l).unwrap().abs() <= 1e-12);
        }
    }
}
