//! Exact exterior solutions with known expansion coefficients.
//!
//! Every solution is an exactly known quadratic (the anchor) plus an offset
//! evaluated directly, so quantities like `u - ½xᵀAx` never suffer
//! cancellation at large radii.

mod descriptor;
mod ode;
mod radial;
mod rings;
mod transform;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::asymptotics::ExpansionCoeffs;
use crate::error::{Error, Result};
use crate::operators::{Equation, Sym2, Vec2};

pub use descriptor::{build, RemarkNormalization, SolutionDescriptor};
pub use ode::{radial_ode_solve, Dopri5, RadialProfile};
pub use radial::{ma_radial_exact, radial_exact, radial_truth, remark_family, RadialExact};
pub use rings::{sample_rings, RingJets};
pub use transform::{
    linear_pullback, perturb, scale_and_shift, transform, AffineFrame, LinearPullback, Perturbed,
    Scaled, Transformed,
};

/// Value, gradient and Hessian at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Jet {
    pub value: f64,
    pub grad: Vec2,
    pub hess: Sym2,
}

impl Jet {
    pub const ZERO: Jet = Jet {
        value: 0.0,
        grad: Vec2::ZERO,
        hess: Sym2::ZERO,
    };

    pub fn add(&self, o: &Jet) -> Jet {
        Jet {
            value: self.value + o.value,
            grad: self.grad + o.grad,
            hess: self.hess + o.hess,
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            value: s * self.value,
            grad: self.grad.scale(s),
            hess: self.hess.scale(s),
        }
    }

    /// Jet of a radial function with `f(r)`, `f'(r)`, `f''(r)` at `x`.
    pub fn radial(x: Vec2, f: f64, df: f64, ddf: f64) -> Jet {
        let r = x.norm();
        let n = x.scale(1.0 / r);
        let tang = df / r;
        Jet {
            value: f,
            grad: n.scale(df),
            hess: Sym2::scalar(tang) + Sym2::outer(n).scale(ddf - tang),
        }
    }
}

/// `½xᵀAx + β·x + γ`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Quadratic {
    pub a: Sym2,
    pub beta: Vec2,
    pub gamma: f64,
}

impl Quadratic {
    pub fn new(a: Sym2, beta: Vec2, gamma: f64) -> Self {
        Quadratic { a, beta, gamma }
    }

    pub fn jet(&self, x: Vec2) -> Jet {
        Jet {
            value: 0.5 * self.a.quad_form(x) + self.beta.dot(x) + self.gamma,
            grad: self.a.apply(x) + self.beta,
            hess: self.a,
        }
    }
}

/// A function split as anchor quadratic plus offset.
pub trait Field: Send + Sync + fmt::Debug {
    fn anchor(&self) -> Quadratic;
    /// `u - anchor` and its derivatives; the caller has checked the domain.
    fn offset(&self, x: Vec2) -> Result<Jet>;
}

/// Zero offset.
#[derive(Debug, Clone, Copy)]
pub struct PureQuadratic(pub Quadratic);

impl Field for PureQuadratic {
    fn anchor(&self) -> Quadratic {
        self.0
    }
    fn offset(&self, _x: Vec2) -> Result<Jet> {
        Ok(Jet::ZERO)
    }
}

/// A solution of `equation` on `r_min ≤ |x| (≤ r_max)`.
#[derive(Clone)]
pub struct ExteriorSolution {
    pub field: Arc<dyn Field>,
    pub r_min: f64,
    pub r_max: Option<f64>,
    pub equation: Equation,
    pub truth: Option<ExpansionCoeffs>,
    pub descriptor: SolutionDescriptor,
}

impl fmt::Debug for ExteriorSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExteriorSolution")
            .field("descriptor", &self.descriptor)
            .field("r_min", &self.r_min)
            .field("r_max", &self.r_max)
            .finish()
    }
}

impl ExteriorSolution {
    pub fn in_domain(&self, x: Vec2) -> bool {
        let r = x.norm();
        x.is_finite()
            && r >= self.r_min * (1.0 - 1e-12)
            && r > 0.0
            && self.r_max.map_or(true, |m| r <= m * (1.0 + 1e-12))
    }

    pub fn check_domain(&self, x: Vec2) -> Result<()> {
        if self.in_domain(x) {
            Ok(())
        } else {
            Err(Error::DomainViolation(format!(
                "|x| = {} outside [{}, {}]",
                x.norm(),
                self.r_min,
                self.r_max.unwrap_or(f64::INFINITY)
            )))
        }
    }

    pub fn anchor(&self) -> Quadratic {
        self.field.anchor()
    }

    pub fn offset_jet(&self, x: Vec2) -> Result<Jet> {
        self.check_domain(x)?;
        self.field.offset(x)
    }

    pub fn jet(&self, x: Vec2) -> Result<Jet> {
        let off = self.offset_jet(x)?;
        Ok(self.anchor().jet(x).add(&off))
    }

    pub fn value(&self, x: Vec2) -> Result<f64> {
        Ok(self.jet(x)?.value)
    }

    pub fn gradient(&self, x: Vec2) -> Result<Vec2> {
        Ok(self.jet(x)?.grad)
    }

    pub fn hessian(&self, x: Vec2) -> Result<Sym2> {
        Ok(self.jet(x)?.hess)
    }

    /// `F(λ(D²u(x))) - target`.
    pub fn residual(&self, x: Vec2) -> Result<f64> {
        self.equation.residual(&self.hessian(x)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.descriptor).expect("descriptor serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let d: SolutionDescriptor = serde_json::from_str(s)
            .map_err(|e| Error::InvalidArgument(format!("bad solution descriptor: {e}")))?;
        build(&d)
    }
}

/// `½xᵀAx + β·x + γ` as a solution of the τ-equation with `C0 = F_τ(λ(A))`.
pub fn quadratic_solution(tau: f64, a: Sym2, beta: Vec2, gamma: f64) -> Result<ExteriorSolution> {
    build(&SolutionDescriptor::Quadratic { tau, a, beta, gamma })
}

pub(crate) fn quadratic_impl(tau: f64, a: Sym2, beta: Vec2, gamma: f64) -> Result<ExteriorSolution> {
    let p = crate::operators::TauParams::new(tau)?;
    let e = a.eigen();
    let c0 = crate::operators::f_tau(&p, e.lambda1, e.lambda2)?;
    let equation = Equation::Tau { params: p, c0 };
    let truth = ExpansionCoeffs::quadratic(&equation, a, beta, gamma)?;
    Ok(ExteriorSolution {
        field: Arc::new(PureQuadratic(Quadratic::new(a, beta, gamma))),
        r_min: 0.0,
        r_max: None,
        equation,
        truth: Some(truth),
        descriptor: SolutionDescriptor::Quadratic { tau, a, beta, gamma },
    })
}
