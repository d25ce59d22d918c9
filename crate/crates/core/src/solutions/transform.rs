use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{ExteriorSolution, Field, Jet, Quadratic, SolutionDescriptor};
use crate::asymptotics::ExpansionCoeffs;
use crate::error::{Error, Result};
use crate::operators::{Branch, Equation, Mat2, Sym2, Vec2};

/// `x ↦ u(Oᵀ(x - x0)) + beta_add·x + gamma_add`, `O` the rotation by
/// `rotation_angle`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineFrame {
    pub rotation_angle: f64,
    pub x0: Vec2,
    pub beta_add: Vec2,
    pub gamma_add: f64,
}

impl AffineFrame {
    pub fn rotation(&self) -> Mat2 {
        Mat2::rotation(self.rotation_angle)
    }

    pub fn translation(x0: Vec2) -> Self {
        AffineFrame {
            x0,
            ..Default::default()
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == AffineFrame::default()
    }
}

#[derive(Debug, Clone)]
pub struct Transformed {
    pub base: ExteriorSolution,
    pub frame: AffineFrame,
}

impl Field for Transformed {
    fn anchor(&self) -> Quadratic {
        let b = self.base.anchor();
        let rot = self.frame.rotation();
        let a = rot.congruence(&b.a);
        let ob = rot.apply(b.beta);
        let x0 = self.frame.x0;
        Quadratic::new(
            a,
            -a.apply(x0) + ob + self.frame.beta_add,
            b.gamma + 0.5 * a.quad_form(x0) - ob.dot(x0) + self.frame.gamma_add,
        )
    }

    fn offset(&self, x: Vec2) -> Result<Jet> {
        let rot = self.frame.rotation();
        let y = rot.transpose().apply(x - self.frame.x0);
        let j = self.base.offset_jet(y)?;
        Ok(Jet {
            value: j.value,
            grad: rot.apply(j.grad),
            hess: rot.congruence(&j.hess),
        })
    }
}

pub(crate) fn transform_impl(
    sol: &ExteriorSolution,
    frame: AffineFrame,
    descriptor: SolutionDescriptor,
) -> Result<ExteriorSolution> {
    let shift = frame.x0.norm();
    if !shift.is_finite() || !frame.rotation_angle.is_finite() {
        return Err(Error::DomainViolation("non-finite frame".into()));
    }
    let r_min = if sol.r_min == 0.0 && shift == 0.0 {
        0.0
    } else {
        sol.r_min + shift
    };
    let r_max = match sol.r_max {
        Some(m) if m - shift <= r_min => {
            return Err(Error::DomainViolation(format!(
                "translation by {shift} leaves no annulus inside r_max = {m}"
            )))
        }
        Some(m) => Some(m - shift),
        None => None,
    };
    // translated entire quadratics stay entire
    let r_min = if matches!(sol.descriptor, SolutionDescriptor::Quadratic { .. }) {
        0.0
    } else {
        r_min
    };
    let rot = frame.rotation();
    let truth = sol
        .truth
        .map(|t| t.transport(&rot, frame.x0, frame.beta_add, frame.gamma_add));
    Ok(ExteriorSolution {
        field: Arc::new(Transformed {
            base: sol.clone(),
            frame,
        }),
        r_min,
        r_max,
        equation: sol.equation,
        truth,
        descriptor,
    })
}

/// Rigid motion plus affine addition; still a solution of the same equation.
pub fn transform(sol: &ExteriorSolution, frame: AffineFrame) -> Result<ExteriorSolution> {
    let d = SolutionDescriptor::Transform {
        base: Box::new(sol.descriptor.clone()),
        frame,
    };
    transform_impl(sol, frame, d)
}

/// `x ↦ u(Lx)` with `|det L| = 1`, for Monge–Ampère solutions only.
#[derive(Debug, Clone)]
pub struct LinearPullback {
    pub base: ExteriorSolution,
    pub l: Mat2,
}

impl Field for LinearPullback {
    fn anchor(&self) -> Quadratic {
        let b = self.base.anchor();
        let lt = self.l.transpose();
        Quadratic::new(self.l.congruence_t(&b.a), lt.apply(b.beta), b.gamma)
    }

    fn offset(&self, x: Vec2) -> Result<Jet> {
        let j = self.base.offset_jet(self.l.apply(x))?;
        Ok(Jet {
            value: j.value,
            grad: self.l.transpose().apply(j.grad),
            hess: self.l.congruence_t(&j.hess),
        })
    }
}

fn pullback_truth(t: &ExpansionCoeffs, l: &Mat2) -> ExpansionCoeffs {
    let q_new = l.congruence_t(&t.q);
    let q_half = t.q.sqrt_psd().unwrap_or(Sym2::ZERO).to_mat();
    let q_new_inv_half = q_new.inv_sqrt_pd().unwrap_or(Sym2::ZERO).to_mat();
    // Q^{1/2} L = R Q'^{1/2}
    let r = q_half * *l * q_new_inv_half;
    let dip = r.transpose().apply(t.dipole());
    ExpansionCoeffs {
        a: l.congruence_t(&t.a),
        beta: l.transpose().apply(t.beta),
        gamma: t.gamma,
        d: t.d,
        d1: dip.x1,
        d2: dip.x2,
        q: q_new,
        errors: t.errors,
    }
}

pub(crate) fn linear_pullback_impl(
    sol: &ExteriorSolution,
    l: Mat2,
    descriptor: SolutionDescriptor,
) -> Result<ExteriorSolution> {
    match sol.equation.tau_params() {
        Some(p) if p.branch == Branch::MA => {}
        _ => {
            return Err(Error::InvalidArgument(
                "linear pullbacks preserve only the Monge-Ampere equation".into(),
            ))
        }
    }
    if (l.det().abs() - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidArgument(format!("|det L| = {} must be 1", l.det().abs())));
    }
    let smin = l.min_singular_value();
    Ok(ExteriorSolution {
        field: Arc::new(LinearPullback {
            base: sol.clone(),
            l,
        }),
        r_min: sol.r_min / smin,
        r_max: sol.r_max.map(|m| m * smin),
        equation: sol.equation,
        truth: sol.truth.map(|t| pullback_truth(&t, &l)),
        descriptor,
    })
}

/// Anisotropic Monge–Ampère solutions from isotropic ones.
pub fn linear_pullback(sol: &ExteriorSolution, l: Mat2) -> Result<ExteriorSolution> {
    let d = SolutionDescriptor::LinearPullback {
        base: Box::new(sol.descriptor.clone()),
        l,
    };
    linear_pullback_impl(sol, l, d)
}

/// `u + eps·x1³`; not a solution, used as a negative control.
#[derive(Debug, Clone)]
pub struct Perturbed {
    pub base: ExteriorSolution,
    pub eps: f64,
}

impl Field for Perturbed {
    fn anchor(&self) -> Quadratic {
        self.base.anchor()
    }

    fn offset(&self, x: Vec2) -> Result<Jet> {
        let j = self.base.offset_jet(x)?;
        let e = self.eps;
        Ok(j.add(&Jet {
            value: e * x.x1.powi(3),
            grad: Vec2::new(3.0 * e * x.x1 * x.x1, 0.0),
            hess: Sym2::new(6.0 * e * x.x1, 0.0, 0.0),
        }))
    }
}

pub fn perturb(sol: &ExteriorSolution, eps: f64) -> ExteriorSolution {
    ExteriorSolution {
        field: Arc::new(Perturbed {
            base: sol.clone(),
            eps,
        }),
        r_min: sol.r_min,
        r_max: sol.r_max,
        equation: sol.equation,
        truth: None,
        descriptor: SolutionDescriptor::Perturbed {
            base: Box::new(sol.descriptor.clone()),
            eps,
        },
    }
}

/// `scale·u + ½·add_quad·|x|²`.
#[derive(Debug, Clone)]
pub struct Scaled {
    pub base: ExteriorSolution,
    pub scale: f64,
    pub add_quad: f64,
}

impl Field for Scaled {
    fn anchor(&self) -> Quadratic {
        let b = self.base.anchor();
        Quadratic::new(
            b.a.scale(self.scale).add_scalar(self.add_quad),
            b.beta.scale(self.scale),
            b.gamma * self.scale,
        )
    }

    fn offset(&self, x: Vec2) -> Result<Jet> {
        Ok(self.base.offset_jet(x)?.scale(self.scale))
    }
}

/// `scale·u + ½·add_quad·|x|²` regarded as a solution of `equation`.
pub fn scale_and_shift(
    sol: &ExteriorSolution,
    scale: f64,
    add_quad: f64,
    equation: Equation,
    truth: Option<ExpansionCoeffs>,
    descriptor: SolutionDescriptor,
) -> ExteriorSolution {
    ExteriorSolution {
        field: Arc::new(Scaled {
            base: sol.clone(),
            scale,
            add_quad,
        }),
        r_min: sol.r_min,
        r_max: sol.r_max,
        equation,
        truth,
        descriptor,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solutions::{ma_radial_exact, quadratic_solution};

    #[test]
    fn identity_frame_is_identity() {
        let s = ma_radial_exact(0.0, 1.0).unwrap();
        let t = transform(&s, AffineFrame::default()).unwrap();
        let x = Vec2::new(3.0, -2.0);
        assert_eq!(s.jet(x).unwrap(), t.jet(x).unwrap());
    }

    #[test]
    fn translated_truth() {
        let s = ma_radial_exact(0.0, 1.0).unwrap();
        let t = transform(&s, AffineFrame::translation(Vec2::new(1.0, 0.0))).unwrap();
        let c = t.truth.unwrap();
        assert!((c.beta - Vec2::new(-1.0, 0.0)).max_abs() < 1e-15);
        assert!((c.d1 + 0.5).abs() < 1e-15 && c.d2.abs() < 1e-15);
        assert_eq!(t.r_min, 2.0);
        let x = Vec2::new(4.0, 3.0);
        let direct = s.value(x - Vec2::new(1.0, 0.0)).unwrap();
        assert!((t.value(x).unwrap() - direct).abs() < 1e-12);
    }

    #[test]
    fn rotation_conjugates_quadratic() {
        let a = Sym2::diag(2.0, 0.5);
        let s = quadratic_solution(0.0, a, Vec2::ZERO, 0.0).unwrap();
        let frame = AffineFrame {
            rotation_angle: std::f64::consts::FRAC_PI_2,
            ..Default::default()
        };
        let t = transform(&s, frame).unwrap();
        let h = t.hessian(Vec2::new(1.0, 1.0)).unwrap();
        assert!(h.max_abs_diff(&Sym2::diag(0.5, 2.0)) < 1e-15);
    }

    #[test]
    fn pullback_keeps_det() {
        let s = ma_radial_exact(0.3, 2.0).unwrap();
        let l = Mat2::new(2.0, 0.5, 0.0, 0.5);
        let t = linear_pullback(&s, l).unwrap();
        let x = Vec2::new(30.0, -7.0);
        let h = t.hessian(x).unwrap();
        assert!((h.det() / 0.6f64.exp() - 1.0).abs() < 1e-12);
        assert!(linear_pullback(&s, Mat2::new(2.0, 0.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn perturbation_breaks_equation() {
        let s = ma_radial_exact(0.0, 1.0).unwrap();
        let p = perturb(&s, 1e-3);
        assert!(p.residual(Vec2::new(5.0, 0.0)).unwrap().abs() > 1e-3);
    }
}
