use serde::{Deserialize, Serialize};

use crate::operators::{Equation, Mat2, Sym2, Vec2};
use crate::Result;

/// Error estimates attached to fitted coefficients (zero for exact truth).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CoeffErrors {
    pub a: f64,
    pub beta: f64,
    pub gamma: f64,
    pub d: f64,
    pub d1: f64,
    pub d2: f64,
}

/// Coefficients of the expansion
/// `u = ½xᵀAx + β·x + γ + d ln(xᵀQx) + (xᵀQx)^{-1/2}(d1 e1 + d2 e2) + O(r^{-2} ln r)`
/// with `e = Q^{1/2}x / |Q^{1/2}x|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionCoeffs {
    pub a: Sym2,
    pub beta: Vec2,
    pub gamma: f64,
    pub d: f64,
    pub d1: f64,
    pub d2: f64,
    pub q: Sym2,
    pub errors: CoeffErrors,
}

impl ExpansionCoeffs {
    /// Pure quadratic: all log and dipole terms vanish.
    pub fn quadratic(eq: &Equation, a: Sym2, beta: Vec2, gamma: f64) -> Result<Self> {
        Ok(ExpansionCoeffs {
            a,
            beta,
            gamma,
            d: 0.0,
            d1: 0.0,
            d2: 0.0,
            q: eq.q_matrix(&a)?,
            errors: CoeffErrors::default(),
        })
    }

    pub fn dipole(&self) -> Vec2 {
        Vec2::new(self.d1, self.d2)
    }

    /// Value of the expansion (without remainder) at `x`.
    pub fn eval(&self, x: Vec2) -> f64 {
        self.quadratic_part(x) + self.log_and_dipole(x)
    }

    pub fn quadratic_part(&self, x: Vec2) -> f64 {
        0.5 * self.a.quad_form(x) + self.beta.dot(x) + self.gamma
    }

    /// `d ln(xᵀQx) + (xᵀQx)^{-1/2}(d1 e1 + d2 e2)`.
    pub fn log_and_dipole(&self, x: Vec2) -> f64 {
        let qq = self.q.quad_form(x);
        let y = self.q.sqrt_psd().unwrap_or(Sym2::ZERO).apply(x);
        self.d * qq.ln() + self.dipole().dot(y) / qq
    }

    /// Coefficients for the same expansion written with `sQ` in place of `Q`.
    pub fn rescale_q(&self, s: f64) -> Self {
        let mut c = *self;
        c.q = self.q.scale(s);
        c.gamma = self.gamma - self.d * s.ln();
        c.d1 = self.d1 * s.sqrt();
        c.d2 = self.d2 * s.sqrt();
        c
    }

    /// Transport under `x ↦ O x + x0` plus a linear term: the new function is
    /// `u(Oᵀ(x - x0)) + beta_add·x + gamma_add`.
    pub fn transport(&self, rot: &Mat2, x0: Vec2, beta_add: Vec2, gamma_add: f64) -> Self {
        let a = rot.congruence(&self.a);
        let q = rot.congruence(&self.q);
        let ob = rot.apply(self.beta);
        let beta = -a.apply(x0) + ob + beta_add;
        let gamma = self.gamma + 0.5 * a.quad_form(x0) - ob.dot(x0) + gamma_add;
        let od = rot.apply(self.dipole());
        let shift = q.sqrt_psd().unwrap_or(Sym2::ZERO).apply(x0).scale(2.0 * self.d);
        ExpansionCoeffs {
            a,
            beta,
            gamma,
            d: self.d,
            d1: od.x1 - shift.x1,
            d2: od.x2 - shift.x2,
            q,
            errors: self.errors,
        }
    }
}
