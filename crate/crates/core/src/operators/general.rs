//! Three-term equations `c2 λ1λ2 + c1(λ1+λ2) + c0 = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients satisfying the structure condition `c2 ≠ 0`, `c0·c2 < c1²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeneralCoeffs {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl GeneralCoeffs {
    pub fn new(c0: f64, c1: f64, c2: f64) -> Result<Self> {
        let g = GeneralCoeffs { c0, c1, c2 };
        general_normalize(&g)?;
        Ok(g)
    }

    pub fn form(&self) -> ThreeTermForm {
        ThreeTermForm::new(self.c0, self.c1, self.c2)
    }
}

/// Returns `(shift, product)` with `(λ1 + shift)(λ2 + shift) = product`.
pub fn general_normalize(g: &GeneralCoeffs) -> Result<(f64, f64)> {
    let GeneralCoeffs { c0, c1, c2 } = *g;
    if !(c0.is_finite() && c1.is_finite() && c2.is_finite()) {
        return Err(Error::StructureViolation(format!("non-finite ({c0}, {c1}, {c2})")));
    }
    if c2 == 0.0 {
        return Err(Error::StructureViolation("c2 = 0".into()));
    }
    if c0 * c2 >= c1 * c1 {
        return Err(Error::StructureViolation(format!(
            "c0*c2 = {} >= c1^2 = {}",
            c0 * c2,
            c1 * c1
        )));
    }
    let shift = c1 / c2;
    let product = (c1 * c1 - c0 * c2) / (c2 * c2);
    Ok((shift, product))
}

/// Unvalidated three-term coefficients; `c2` may vanish (the linear case).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThreeTermForm {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl ThreeTermForm {
    pub fn new(c0: f64, c1: f64, c2: f64) -> Self {
        ThreeTermForm { c0, c1, c2 }
    }

    pub fn eval(&self, l1: f64, l2: f64) -> f64 {
        self.c2 * l1 * l2 + self.c1 * (l1 + l2) + self.c0
    }

    /// `(shift, product)` when `c2 ≠ 0`.
    pub fn shift_product(&self) -> Option<(f64, f64)> {
        if self.c2 == 0.0 {
            return None;
        }
        let s = self.c1 / self.c2;
        Some((s, (self.c1 * self.c1 - self.c0 * self.c2) / (self.c2 * self.c2)))
    }

    /// `λ(α+δ) - α`, where λ is the partner of `α+δ` and α lies on the
    /// diagonal of the solution set. Uses `(α+s)² = P`, which gives
    /// `-(α+s)δ/(α+s+δ)` with no cancellation. `None` when `δ` is large.
    pub fn deviation(&self, alpha: f64, delta: f64) -> Option<f64> {
        if self.c2 == 0.0 {
            return if self.c1 != 0.0 { Some(-delta) } else { None };
        }
        let m = alpha + self.c1 / self.c2;
        if m == 0.0 || delta.abs() > 0.5 * m.abs() {
            return None;
        }
        Some(-m * delta / (m + delta))
    }
}
