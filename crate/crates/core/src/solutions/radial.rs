//! Closed-form radial solutions of three-term equations.
//!
//! With `(λ1 + s)(λ2 + s) = P`, `λ1 = U''`, `λ2 = U'/r`, the function
//! `q = U' + s r` obeys `(q²)' = 2P r`, so `q = σ sqrt(P r² + k)`.

use std::f64::consts::LN_2;
use std::sync::Arc;

use super::{ExteriorSolution, Field, Jet, Quadratic, RemarkNormalization, SolutionDescriptor};
use crate::asymptotics::{CoeffErrors, ExpansionCoeffs};
use crate::error::{Error, Result};
use crate::operators::{Equation, Sym2, Vec2};

/// `U' = σ sqrt(P r² + k) - s r` about the anchor `½α|x|²`, `α = σ√P - s`.
#[derive(Debug, Clone, Copy)]
pub struct RadialExact {
    pub sigma: f64,
    pub p: f64,
    pub s: f64,
    pub k: f64,
    pub alpha: f64,
}

impl RadialExact {
    pub fn new(eq: &Equation, k: f64) -> Result<Self> {
        let form = eq.three_term();
        let (s, p) = form.shift_product().ok_or_else(|| {
            Error::InvalidArgument("linear (harmonic) case has no radial three-term form".into())
        })?;
        if !(p > 0.0) {
            return Err(Error::StructureViolation(format!("product {p} is not positive")));
        }
        let alpha = eq.anchor_eigenvalue()?;
        let sigma = (alpha + s).signum();
        Ok(RadialExact {
            sigma,
            p,
            s,
            k,
            alpha,
        })
    }

    /// `sqrt(P r² + k)` without cancellation.
    fn root(&self, r: f64) -> f64 {
        let a = self.p.sqrt() * r;
        if self.k >= 0.0 {
            a.hypot(self.k.sqrt())
        } else {
            let b = (-self.k).sqrt();
            ((a - b) * (a + b)).sqrt()
        }
    }

    /// Offset value, slope and curvature at radius `r`.
    pub fn offset_profile(&self, r: f64) -> (f64, f64, f64) {
        if self.k == 0.0 {
            return (0.0, 0.0, 0.0);
        }
        let sp = self.p.sqrt();
        let sq = self.root(r);
        let den = sq + sp * r;
        let k = self.k;
        let log_term = if k > 0.0 {
            (sp * r / k.sqrt()).asinh()
        } else {
            (sp * r / (-k).sqrt()).acosh()
        };
        let value = self.sigma * (0.5 * r * k / den + k / (2.0 * sp) * log_term);
        let slope = self.sigma * k / den;
        let curv = -self.sigma * sp * k / (sq * den);
        (value, slope, curv)
    }

    /// Smallest radius where the profile is defined.
    pub fn r_floor(&self) -> f64 {
        if self.k < 0.0 {
            (-self.k / self.p).sqrt()
        } else {
            0.0
        }
    }
}

impl Field for RadialExact {
    fn anchor(&self) -> Quadratic {
        Quadratic::new(Sym2::scalar(self.alpha), Vec2::ZERO, 0.0)
    }

    fn offset(&self, x: Vec2) -> Result<Jet> {
        if self.k == 0.0 {
            return Ok(Jet::ZERO);
        }
        let (f, df, ddf) = self.offset_profile(x.norm());
        Ok(Jet::radial(x, f, df, ddf))
    }
}

/// Exact coefficients of the closed-form radial solution with constant `k`
/// (anchor constant 0): `d = σk/(4√P)`.
pub fn radial_truth(eq: &Equation, k: f64) -> Result<ExpansionCoeffs> {
    let rad = RadialExact::new(eq, k)?;
    let a = Sym2::scalar(rad.alpha);
    let q = eq.q_matrix(&a)?;
    let d = rad.sigma * k / (4.0 * rad.p.sqrt());
    let gamma = if k == 0.0 {
        0.0
    } else {
        d * (1.0 + 2.0 * LN_2 + rad.p.ln() - k.abs().ln() - q.m11.ln())
    };
    Ok(ExpansionCoeffs {
        a,
        beta: Vec2::ZERO,
        gamma,
        d,
        d1: 0.0,
        d2: 0.0,
        q,
        errors: CoeffErrors::default(),
    })
}

pub(crate) fn radial_exact_impl(
    eq: Equation,
    k: f64,
    r_min: f64,
    descriptor: SolutionDescriptor,
) -> Result<ExteriorSolution> {
    let rad = RadialExact::new(&eq, k)?;
    if !(r_min > rad.r_floor()) || !r_min.is_finite() {
        return Err(Error::DomainViolation(format!(
            "r_min = {r_min} must exceed {}",
            rad.r_floor()
        )));
    }
    // eigenvalues are monotone in r, so r_min and infinity bound them
    let (_, e, de) = rad.offset_profile(r_min);
    let (l1, l2) = (rad.alpha + de, rad.alpha + e / r_min);
    if !(eq.is_admissible(l1) && eq.is_admissible(l2)) {
        return Err(Error::AdmissibilityLost { r: r_min });
    }
    eq.value(l1, l2)?;
    let truth = radial_truth(&eq, k)?;
    Ok(ExteriorSolution {
        field: Arc::new(rad),
        r_min,
        r_max: None,
        equation: eq,
        truth: Some(truth),
        descriptor,
    })
}

/// Radial solution `U' = σ sqrt(P r² + k) - s r` of any equation with a
/// three-term form.
pub fn radial_exact(eq: &Equation, k: f64, r_min: f64) -> Result<ExteriorSolution> {
    let descriptor = SolutionDescriptor::RadialExact {
        equation: eq.spec(),
        k,
        r_min,
    };
    radial_exact_impl(*eq, k, r_min, descriptor)
}

/// Monge–Ampère radial family `U' = sqrt(e^{2C0} r² + c1)` on `|x| ≥ 1`.
pub fn ma_radial_exact(c0: f64, c1: f64) -> Result<ExteriorSolution> {
    super::build(&SolutionDescriptor::MaRadialExact { c0, c1 })
}

/// Radial family `u = e^{C0} ∫_0^{(xᵀAx)^{1/2}} sqrt(t² + c1) dt`, `A = e^{C0}I`,
/// in its printed normalization or the one with `det D²u = e^{2C0}`.
pub fn remark_family(
    variant: RemarkNormalization,
    c0: f64,
    c1: f64,
) -> Result<ExteriorSolution> {
    super::build(&SolutionDescriptor::RemarkFamily { variant, c0, c1 })
}

pub(crate) fn ma_impl(c0: f64, c1: f64, descriptor: SolutionDescriptor) -> Result<ExteriorSolution> {
    if !(c1 >= 0.0) {
        return Err(Error::InvalidArgument(format!("c1 = {c1} must be nonnegative")));
    }
    radial_exact_impl(Equation::tau(0.0, c0)?, c1, 1.0, descriptor)
}

pub(crate) fn remark_impl(
    variant: RemarkNormalization,
    c0: f64,
    c1: f64,
    descriptor: SolutionDescriptor,
) -> Result<ExteriorSolution> {
    match variant {
        RemarkNormalization::DetConsistent => ma_impl(c0, c1, descriptor),
        // U' = e^{3C0/2} sqrt(e^{C0} r² + c1), which has det D²u → e^{4C0}
        RemarkNormalization::Printed => {
            if !(c1 >= 0.0) {
                return Err(Error::InvalidArgument(format!("c1 = {c1} must be nonnegative")));
            }
            radial_exact_impl(
                Equation::tau(0.0, 2.0 * c0)?,
                (3.0 * c0).exp() * c1,
                1.0,
                descriptor,
            )
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn ma_value_at_ten() {
        let s = ma_radial_exact(0.0, 1.0).unwrap();
        let want = 10.0 * 101f64.sqrt() / 2.0 + 0.5 * 10f64.asinh();
        for th in [0.0, 0.7, 3.0] {
            let v = s.value(Vec2::polar(10.0, th)).unwrap();
            assert!((v - want).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn ma_truth_d() {
        for (c0, c1, d) in [(0.0, 0.0, 0.0), (0.0, 1.0, 0.25), (2f64.ln(), 1.0, 0.125)] {
            let t = ma_radial_exact(c0, c1).unwrap().truth.unwrap();
            assert!((t.d - d).abs() < 1e-15, "{c0} {c1}: {}", t.d);
        }
    }

    #[test]
    fn ma_det_exact() {
        for (c0, c1) in [(0.0, 1.0), (2f64.ln(), 2.0), (-0.5, 0.3)] {
            let s = ma_radial_exact(c0, c1).unwrap();
            for r in [1.0, 3.0, 1e2, 1e4] {
                let h = s.hessian(Vec2::polar(r, 0.3)).unwrap();
                assert!((h.det() / (2.0 * c0).exp() - 1.0).abs() < 1e-12, "r={r}");
            }
        }
    }

    #[test]
    fn printed_normalization_det() {
        let c0 = 2f64.ln();
        let s = remark_family(RemarkNormalization::Printed, c0, 1.0).unwrap();
        let h = s.hessian(Vec2::new(7.0, 2.0)).unwrap();
        assert!((h.det() / (4.0 * c0).exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn every_branch_closed_form_residual() {
        for (tau, c0) in [
            (0.0, 0.3),
            (PI / 6.0, -1.0),
            (PI / 4.0, -1.0),
            (PI / 3.0, 0.4),
            (PI / 3.0, -3.0),
            (3.0 * PI / 8.0, 0.5),
            (FRAC_PI_2, FRAC_PI_2),
            (FRAC_PI_2, -1.0),
        ] {
            let eq = Equation::tau(tau, c0).unwrap();
            for k in [0.5, -0.2] {
                let s = radial_exact(&eq, k, 2.0).unwrap();
                for r in [2.0, 10.0, 1e3, 1e4] {
                    let res = s.residual(Vec2::polar(r, 1.0)).unwrap();
                    assert!(res.abs() < 1e-12, "tau {tau} c0 {c0} k {k} r {r}: {res}");
                }
            }
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let s = radial_exact(&Equation::tau(PI / 3.0, 0.4).unwrap(), 0.7, 2.0).unwrap();
        let x = Vec2::new(5.0, -3.0);
        let h = 1e-4 * x.norm();
        let g = s.gradient(x).unwrap();
        let fx = (s.value(x + Vec2::new(h, 0.0)).unwrap() - s.value(x - Vec2::new(h, 0.0)).unwrap()) / (2.0 * h);
        let fy = (s.value(x + Vec2::new(0.0, h)).unwrap() - s.value(x - Vec2::new(0.0, h)).unwrap()) / (2.0 * h);
        assert!((fx - g.x1).abs() < 1e-6 && (fy - g.x2).abs() < 1e-6);
    }
}
