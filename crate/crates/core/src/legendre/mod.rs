//! Transforms between branches: the partial Legendre dual for
//! 0 < τ < π/4, the rotation for π/4 < τ < π/2, and the reduction of
//! three-term equations to Monge–Ampère.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::asymptotics::{CoeffErrors, ExpansionCoeffs};
use crate::error::{Error, Result};
use crate::operators::{Branch, Equation, GeneralCoeffs, Sym2, TauParams, Vec2};
use crate::solutions::{
    build, scale_and_shift, ExteriorSolution, Field, Jet, Quadratic, SolutionDescriptor,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MapKind {
    LegendreSmallTau,
    RotationLargeTau,
    ThreeTerm,
}

/// Points sampled on a circle when checking margins and mapping boundaries.
const BOUNDARY_SAMPLES: usize = 256;

/// `ũ(x̃) = ½κ|x̃|² + ω v(x̃)`, where `v` is the Legendre conjugate of
/// `ū = σu + ½ shift |x|²` and `x̃ = Dū(x)`.
#[derive(Debug, Clone)]
pub struct Conjugate {
    pub base: ExteriorSolution,
    pub sign: f64,
    pub shift: f64,
    pub kappa: f64,
    pub omega: f64,
    m: Sym2,
    m_inv: Sym2,
    beta_bar: Vec2,
    gamma_bar: f64,
}

impl Conjugate {
    fn new(base: &ExteriorSolution, sign: f64, shift: f64, kappa: f64, omega: f64) -> Result<Self> {
        let an = base.anchor();
        let m = an.a.scale(sign).add_scalar(shift);
        let m_inv = m
            .inverse()
            .filter(|_| m.is_positive_definite())
            .ok_or_else(|| Error::ConvexityMargin("shifted anchor Hessian is not positive".into()))?;
        Ok(Conjugate {
            base: base.clone(),
            sign,
            shift,
            kappa,
            omega,
            m,
            m_inv,
            beta_bar: an.beta.scale(sign),
            gamma_bar: an.gamma * sign,
        })
    }

    /// Offset of `ū`.
    fn s_jet(&self, x: Vec2) -> Result<Jet> {
        Ok(self.base.offset_jet(x)?.scale(self.sign))
    }

    /// `x̃ = Dū(x)`.
    pub fn forward(&self, x: Vec2) -> Result<Vec2> {
        let j = self.s_jet(x)?;
        Ok(self.m.apply(x) + self.beta_bar + j.grad)
    }

    /// Solves `Dū(x) = x̃` for `x`; returns `(x, δ, s-jet at x)` with
    /// `δ = x - M⁻¹(x̃ - β̄)`.
    fn invert(&self, xt: Vec2) -> Result<(Vec2, Vec2, Jet)> {
        let x_lin = self.m_inv.apply(xt - self.beta_bar);
        let mut delta = Vec2::ZERO;
        let mut j = self.s_jet(x_lin)?;
        // residual Mδ + ∇s(x_lin + δ), free of the O(|x̃|) cancellation
        let mut res = self.m.apply(delta) + j.grad;
        let scale = 1.0 + xt.norm();
        for _ in 0..100 {
            let rn = res.norm();
            if rn <= 1e-15 * scale {
                return Ok((x_lin + delta, delta, j));
            }
            let jac = self.m + j.hess;
            let step = jac
                .inverse()
                .ok_or(Error::InversionFailure {
                    x1: xt.x1,
                    x2: xt.x2,
                    residual: rn,
                })?
                .apply(res);
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let cand = delta - step.scale(t);
                if let Ok(jc) = self.s_jet(x_lin + cand) {
                    let rc = self.m.apply(cand) + jc.grad;
                    if rc.norm() < rn {
                        delta = cand;
                        j = jc;
                        res = rc;
                        accepted = true;
                        break;
                    }
                }
                t *= 0.5;
            }
            if !accepted {
                // no further decrease: accept if at rounding level
                if rn <= 1e-12 * scale {
                    return Ok((x_lin + delta, delta, j));
                }
                return Err(Error::InversionFailure {
                    x1: xt.x1,
                    x2: xt.x2,
                    residual: rn,
                });
            }
        }
        let rn = res.norm();
        if rn <= 1e-12 * scale {
            Ok((x_lin + delta, delta, j))
        } else {
            Err(Error::InversionFailure {
                x1: xt.x1,
                x2: xt.x2,
                residual: rn,
            })
        }
    }

    /// Primal point with `Dū(x) = x̃`.
    pub fn backward(&self, xt: Vec2) -> Result<Vec2> {
        Ok(self.invert(xt)?.0)
    }
}

impl Field for Conjugate {
    fn anchor(&self) -> Quadratic {
        let mb = self.m_inv.apply(self.beta_bar);
        Quadratic::new(
            self.m_inv.scale(self.omega).add_scalar(self.kappa),
            mb.scale(-self.omega),
            self.omega * (0.5 * self.beta_bar.dot(mb) - self.gamma_bar),
        )
    }

    fn offset(&self, xt: Vec2) -> Result<Jet> {
        let (_, delta, j) = self.invert(xt)?;
        // v - v_anchor = -½δᵀMδ - s(x); D: δ; D²: (M+S)⁻¹ - M⁻¹ = -M⁻¹S(M+S)⁻¹
        let value = -0.5 * self.m.quad_form(delta) - j.value;
        let ms = (self.m + j.hess)
            .inverse()
            .ok_or(Error::InversionFailure {
                x1: xt.x1,
                x2: xt.x2,
                residual: f64::NAN,
            })?;
        let prod = self.m_inv.to_mat() * j.hess.to_mat() * ms.to_mat();
        let hess = Sym2::new(-prod.a11, -0.5 * (prod.a12 + prod.a21), -prod.a22);
        Ok(Jet {
            value,
            grad: delta,
            hess,
        }
        .scale(self.omega))
    }
}

/// A primal solution, its transform, and the map between them.
#[derive(Debug, Clone)]
pub struct DualPair {
    pub primal: ExteriorSolution,
    pub dual: ExteriorSolution,
    /// Hessian shift `a + b` or `c1/c2` (0 for the rotation).
    pub shift: f64,
    /// `2b` for the small-τ dual, `1/b` for the rotation, 1 otherwise.
    pub scale: f64,
    pub map_kind: MapKind,
    /// The three-term reduction operated on `-u`.
    pub negated: bool,
    conj: Option<Arc<Conjugate>>,
}

impl DualPair {
    /// Dual-side point corresponding to a primal point.
    pub fn dual_point(&self, x: Vec2) -> Result<Vec2> {
        match &self.conj {
            Some(c) => c.forward(x),
            None => Ok(x),
        }
    }

    /// Primal point corresponding to a dual-side point.
    pub fn primal_point(&self, xt: Vec2) -> Result<Vec2> {
        match &self.conj {
            Some(c) => c.backward(xt),
            None => Ok(xt),
        }
    }
}

/// Minimum over the sampled boundary circles and the anchor of
/// `λmin(σD²u) + shift`.
fn convexity_margin(sol: &ExteriorSolution, sign: f64, shift: f64) -> Result<f64> {
    let mut m = sol.anchor().a.scale(sign).eigen().lambda1 + shift;
    let mut radii = vec![if sol.r_min > 0.0 { sol.r_min } else { 1.0 }];
    if let Some(rm) = sol.r_max {
        radii.push(rm);
    }
    for r in radii {
        for j in 0..BOUNDARY_SAMPLES {
            let th = 2.0 * std::f64::consts::PI * j as f64 / BOUNDARY_SAMPLES as f64;
            let h = sol.hessian(Vec2::polar(r, th))?.scale(sign);
            m = m.min(h.eigen().lambda1 + shift);
        }
    }
    Ok(m)
}

fn conj_truth(
    sol: &ExteriorSolution,
    conj: &Conjugate,
    dual_eq: &Equation,
) -> Option<ExpansionCoeffs> {
    let t = sol.truth?;
    let an = sol.anchor();
    if t.a.max_abs_diff(&an.a) > 1e-12 * (1.0 + an.a.max_abs()) || (t.beta - an.beta).max_abs() > 1e-12 * (1.0 + an.beta.max_abs()) {
        return None;
    }
    let dq = conj.anchor();
    let q_dual = dual_eq.q_matrix(&dq.a).ok()?;
    let q_hat = conj.m_inv.sandwich(&t.q);
    let c = q_hat.trace() / q_dual.trace();
    if q_hat.max_abs_diff(&q_dual.scale(c)) > 1e-10 * q_hat.max_abs() {
        return None;
    }
    let d_bar = conj.sign * t.d;
    let dip_bar = t.dipole().scale(conj.sign);
    let gamma_w = conj.sign * (t.gamma - an.gamma);
    let qd_half = q_dual.sqrt_psd()?;
    let v = (q_dual.inv_sqrt_pd()?.to_mat() * conj.m_inv.to_mat() * t.q.sqrt_psd()?.to_mat())
        .apply(dip_bar)
        .scale(1.0 / c);
    let w = -conj.omega;
    let dip = (qd_half.apply(conj.beta_bar).scale(-2.0 * d_bar) + v).scale(w);
    Some(ExpansionCoeffs {
        a: dq.a,
        beta: dq.beta,
        gamma: dq.gamma + w * (gamma_w + d_bar * c.ln()),
        d: w * d_bar,
        d1: dip.x1,
        d2: dip.x2,
        q: q_dual,
        errors: CoeffErrors::default(),
    })
}

fn conjugate_solution(
    sol: &ExteriorSolution,
    conj: Conjugate,
    dual_eq: Equation,
    descriptor: SolutionDescriptor,
) -> Result<(ExteriorSolution, Arc<Conjugate>)> {
    let mut r_min = 0.0f64;
    for j in 0..if sol.r_min > 0.0 { BOUNDARY_SAMPLES } else { 0 } {
        let th = 2.0 * std::f64::consts::PI * j as f64 / BOUNDARY_SAMPLES as f64;
        r_min = r_min.max(conj.forward(Vec2::polar(sol.r_min, th))?.norm());
    }
    let r_max = match sol.r_max {
        Some(rm) => {
            let mut m = f64::INFINITY;
            for j in 0..BOUNDARY_SAMPLES {
                let th = 2.0 * std::f64::consts::PI * j as f64 / BOUNDARY_SAMPLES as f64;
                m = m.min(conj.forward(Vec2::polar(rm, th))?.norm());
            }
            Some(m)
        }
        None => None,
    };
    // the sampled boundary image is polygonal; pad by a hair
    let r_min = r_min * (1.0 + 1e-6);
    let r_max = r_max.map(|m| m * (1.0 - 1e-6));
    let truth = conj_truth(sol, &conj, &dual_eq);
    let conj = Arc::new(conj);
    Ok((
        ExteriorSolution {
            field: conj.clone(),
            r_min,
            r_max,
            equation: dual_eq,
            truth,
            descriptor,
        },
        conj,
    ))
}

/// Dual of a solution with 0 < τ < π/4: `ũ = ½|x̃|² - 2b v`, which solves
/// `Σ ln λ̃ = 2bC0/sqrt(a²+1)`.
pub fn legendre_dual(sol: &ExteriorSolution, p: &TauParams) -> Result<DualPair> {
    let d = SolutionDescriptor::LegendreDual {
        base: Box::new(sol.descriptor.clone()),
        tau: p.tau,
    };
    legendre_dual_impl(sol, p, d)
}

fn check_branch(sol: &ExteriorSolution, p: &TauParams, want: Branch) -> Result<f64> {
    if p.branch != want {
        return Err(Error::InvalidArgument(format!("needs the {want} branch, got {}", p.branch)));
    }
    match sol.equation {
        Equation::Tau { params, c0 } if params.tau == p.tau => Ok(c0),
        _ => Err(Error::InvalidArgument(format!(
            "solution does not solve the tau = {} equation",
            p.tau
        ))),
    }
}

pub(crate) fn legendre_dual_impl(
    sol: &ExteriorSolution,
    p: &TauParams,
    descriptor: SolutionDescriptor,
) -> Result<DualPair> {
    let c0 = check_branch(sol, p, Branch::LogQuotient)?;
    let (a, b) = (p.a, p.b);
    let margin = convexity_margin(sol, 1.0, a - b)?;
    if margin < 1e-6 {
        return Err(Error::ConvexityMargin(format!(
            "min eigenvalue of D²u + (a-b)I is {margin}"
        )));
    }
    let dual_c0 = b * c0 / (a * a + 1.0).sqrt();
    let dual_eq = Equation::tau(0.0, dual_c0)?;
    let conj = Conjugate::new(sol, 1.0, a + b, 1.0, -2.0 * b)?;
    let (dual, conj) = conjugate_solution(sol, conj, dual_eq, descriptor)?;
    Ok(DualPair {
        primal: sol.clone(),
        dual,
        shift: a + b,
        scale: 2.0 * b,
        map_kind: MapKind::LegendreSmallTau,
        negated: false,
        conj: Some(conj),
    })
}

/// `v = u/b + a|x|²/(2b)` for π/4 < τ < π/2; `v` solves the special
/// Lagrangian equation with constant `bC0/sqrt(a²+1) + π/2`.
pub fn rotate_large_tau(sol: &ExteriorSolution, p: &TauParams) -> Result<ExteriorSolution> {
    let d = SolutionDescriptor::RotatedLargeTau {
        base: Box::new(sol.descriptor.clone()),
        tau: p.tau,
    };
    rotate_large_tau_impl(sol, p, d)
}

pub(crate) fn rotate_large_tau_impl(
    sol: &ExteriorSolution,
    p: &TauParams,
    descriptor: SolutionDescriptor,
) -> Result<ExteriorSolution> {
    let c0 = check_branch(sol, p, Branch::ArctanQuotient)?;
    let (a, b) = (p.a, p.b);
    let margin = convexity_margin(sol, 1.0, a + b)?;
    if margin <= 0.0 {
        return Err(Error::ConvexityMargin(format!(
            "min eigenvalue of D²u + (a+b)I is {margin}"
        )));
    }
    let theta0 = b * c0 / (a * a + 1.0).sqrt() + std::f64::consts::FRAC_PI_2;
    let eq = Equation::tau(std::f64::consts::FRAC_PI_2, theta0)?;
    let kappa = b * b * p.tau.sin();
    let truth = sol.truth.map(|t| {
        let dip = t.dipole().scale(1.0 / (b * kappa.sqrt()));
        ExpansionCoeffs {
            a: t.a.add_scalar(a).scale(1.0 / b),
            beta: t.beta.scale(1.0 / b),
            gamma: t.gamma / b + t.d / b * kappa.ln(),
            d: t.d / b,
            d1: dip.x1,
            d2: dip.x2,
            q: t.q.scale(1.0 / kappa),
            errors: t.errors,
        }
    });
    Ok(scale_and_shift(sol, 1.0 / b, a / b, eq, truth, descriptor))
}

/// Rotation as a [`DualPair`] (identity point map).
pub fn rotate_large_tau_pair(sol: &ExteriorSolution, p: &TauParams) -> Result<DualPair> {
    let dual = rotate_large_tau(sol, p)?;
    Ok(DualPair {
        primal: sol.clone(),
        dual,
        shift: 0.0,
        scale: 1.0 / p.b,
        map_kind: MapKind::RotationLargeTau,
        negated: false,
        conj: None,
    })
}

/// Legendre conjugate of `σu + (s/2)|x|²`, `s = c1/c2`, for a solution of
/// `c2λ1λ2 + c1(λ1+λ2) + c0 = 0`; it solves
/// `det D²ũ = c2²/(c1² - c0c2)`. Concave solutions are handled through `-u`.
pub fn three_term_reduce(sol: &ExteriorSolution, g: &GeneralCoeffs) -> Result<DualPair> {
    let d = SolutionDescriptor::ThreeTermDual {
        base: Box::new(sol.descriptor.clone()),
        coeffs: *g,
    };
    three_term_reduce_impl(sol, g, d)
}

pub(crate) fn three_term_reduce_impl(
    sol: &ExteriorSolution,
    g: &GeneralCoeffs,
    descriptor: SolutionDescriptor,
) -> Result<DualPair> {
    let (_, p) = crate::operators::general_normalize(g)?;
    // normalize c2 > 0
    let (c0, c1, c2) = if g.c2 < 0.0 { (-g.c0, -g.c1, -g.c2) } else { (g.c0, g.c1, g.c2) };
    let s = c1 / c2;
    // the solution must solve this equation
    let x_probe = Vec2::polar(sol.r_min.max(1.0) * 1.5, 0.3);
    let h = sol.hessian(x_probe)?.eigen();
    let res = c2 * h.lambda1 * h.lambda2 + c1 * (h.lambda1 + h.lambda2) + c0;
    let size = c2.abs() * (h.lambda1 * h.lambda2).abs() + c1.abs() * (h.lambda1.abs() + h.lambda2.abs()) + c0.abs();
    if res.abs() > 1e-8 * (1.0 + size) {
        return Err(Error::StructureViolation(format!(
            "solution does not satisfy the three-term equation (residual {res})"
        )));
    }
    let (sign, shift) = if h.lambda1 + s > 0.0 { (1.0, s) } else { (-1.0, -s) };
    let margin = convexity_margin(sol, sign, shift)?;
    if margin <= 0.0 {
        return Err(Error::ConvexityMargin(format!(
            "min eigenvalue of the shifted Hessian is {margin}"
        )));
    }
    let dual_eq = Equation::tau(0.0, -0.5 * p.ln())?;
    let conj = Conjugate::new(sol, sign, shift, 0.0, 1.0)?;
    let (dual, conj) = conjugate_solution(sol, conj, dual_eq, descriptor)?;
    Ok(DualPair {
        primal: sol.clone(),
        dual,
        shift,
        scale: 1.0,
        map_kind: MapKind::ThreeTerm,
        negated: sign < 0.0,
        conj: Some(conj),
    })
}

/// Rebuilds the pair behind a dual descriptor.
pub fn pair_from_descriptor(d: &SolutionDescriptor) -> Result<DualPair> {
    match d {
        SolutionDescriptor::LegendreDual { base, tau } => {
            legendre_dual_impl(&build(base)?, &TauParams::new(*tau)?, d.clone())
        }
        SolutionDescriptor::ThreeTermDual { base, coeffs } => {
            three_term_reduce_impl(&build(base)?, coeffs, d.clone())
        }
        SolutionDescriptor::RotatedLargeTau { base, tau } => {
            let primal = build(base)?;
            let p = TauParams::new(*tau)?;
            let dual = rotate_large_tau_impl(&primal, &p, d.clone())?;
            Ok(DualPair {
                primal,
                dual,
                shift: 0.0,
                scale: 1.0 / p.b,
                map_kind: MapKind::RotationLargeTau,
                negated: false,
                conj: None,
            })
        }
        _ => Err(Error::InvalidArgument("not a dual descriptor".into())),
    }
}
