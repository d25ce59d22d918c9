//! Extraction of `(A, β, γ, d, d1, d2)` from ring samples.
//!
//! Every average acts on the offset `u - anchor`, so the quadratic growth
//! never enters the arithmetic and coefficients are read off as
//! corrections to the anchor.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coeffs::{CoeffErrors, ExpansionCoeffs};
use crate::error::{Error, Result};
use crate::lsq::lstsq;
use crate::operators::{Sym2, Vec2};
use crate::solutions::ExteriorSolution;

/// Radii and angular resolution used by the fits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub radii: Vec<f64>,
    pub n_theta: usize,
    /// Fits are reported against `q_scale · Q_canonical`.
    pub q_scale: f64,
}

impl FitOptions {
    /// Geometric ladder of `n` radii on `[r_lo, r_hi]`.
    pub fn geometric(r_lo: f64, r_hi: f64, n: usize, n_theta: usize) -> Self {
        let h = (r_hi / r_lo).ln() / (n.max(2) - 1) as f64;
        let mut radii: Vec<f64> = (0..n).map(|i| r_lo * (h * i as f64).exp()).collect();
        if let Some(last) = radii.last_mut() {
            *last = r_hi;
        }
        FitOptions {
            radii,
            n_theta,
            q_scale: 1.0,
        }
    }

    /// Ladder `[10, 10⁴]` with 40 rings and 256 angles, moved outward when
    /// the solution's inner radius demands it and clipped to its outer one.
    pub fn for_solution(sol: &ExteriorSolution) -> Self {
        let lo = 10f64.max(4.0 * sol.r_min);
        let hi = sol.r_max.map_or(1e3 * lo, |m| m.min(1e3 * lo));
        Self::geometric(lo, hi, 40, 256)
    }

    fn validate(&self, sol: &ExteriorSolution) -> Result<()> {
        if self.radii.len() < 3 {
            return Err(Error::InvalidArgument("fits need at least 3 rings".into()));
        }
        if self.radii.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("ladder radii must increase".into()));
        }
        if self.n_theta < 8 || self.n_theta % 2 != 0 {
            return Err(Error::InvalidArgument(format!("n_theta = {} must be even and >= 8", self.n_theta)));
        }
        let outer = *self.radii.last().unwrap();
        if sol.r_min > 0.0 && outer < 100.0 * sol.r_min {
            return Err(Error::InvalidArgument(format!(
                "outermost radius {outer} is below 100 r_min = {}",
                100.0 * sol.r_min
            )));
        }
        if !(self.q_scale > 0.0) {
            return Err(Error::InvalidArgument("q_scale must be positive".into()));
        }
        Ok(())
    }
}

/// Means over `θ_j = 2πj/n` of `f(θ)` on every radius; rings run in
/// parallel, each sum in fixed order.
fn ring_means<const N: usize, F>(radii: &[f64], n_theta: usize, f: F) -> Result<Vec<[f64; N]>>
where
    F: Fn(f64, f64) -> Result<[f64; N]> + Sync,
{
    radii
        .par_iter()
        .map(|&r| {
            let mut acc = [0.0; N];
            for j in 0..n_theta {
                let th = 2.0 * PI * j as f64 / n_theta as f64;
                let v = f(r, th)?;
                for (a, v) in acc.iter_mut().zip(v) {
                    *a += v;
                }
            }
            Ok(acc.map(|a| a / n_theta as f64))
        })
        .collect()
}

/// Limit value `c0` of the model `y(r) = Σ c_i φ_i(r)` with `φ_0 = 1`,
/// and an error bar from the standard error and the spread between the
/// full ladder and its outer half.
fn extrapolate(radii: &[f64], ys: &[f64], basis: &dyn Fn(f64) -> Vec<f64>) -> Result<(Vec<f64>, Vec<f64>)> {
    let rows: Vec<Vec<f64>> = radii.iter().map(|&r| basis(r)).collect();
    let p = rows[0].len();
    let mut take = p;
    while take > 1 && radii.len() < take + 2 {
        take -= 1;
    }
    let rows: Vec<Vec<f64>> = rows.into_iter().map(|r| r[..take].to_vec()).collect();
    let full = lstsq(&rows, ys, None)?;
    let half = radii.len() / 2;
    let mut err: Vec<f64> = full.stderr.iter().map(|s| 2.0 * s).collect();
    if radii.len() - half >= take + 2 {
        let outer = lstsq(&rows[half..], &ys[half..], None)?;
        for (e, (a, b)) in err.iter_mut().zip(full.coef.iter().zip(&outer.coef)) {
            *e = e.max((a - b).abs());
        }
    }
    let mut coef = full.coef;
    coef.resize(p, 0.0);
    err.resize(p, 0.0);
    Ok((coef, err))
}

fn hess_basis(r: f64) -> Vec<f64> {
    let (r2, l) = (r.powi(-2), r.ln());
    vec![1.0, r2, r2 * r2, r2 * r2 * l, r2 * r2 * r2]
}

fn log_basis(rho: f64) -> Vec<f64> {
    let (r2, l) = (rho.powi(-2), rho.ln());
    vec![1.0, 2.0 * l, r2, r2 * l, r2 * r2, r2 * r2 * l, r2 * r2 * r2]
}

fn dipole_basis(rho: f64) -> Vec<f64> {
    let (r2, l) = (rho.powi(-2), rho.ln());
    vec![1.0, r2, r2 * l, r2 * r2, r2 * r2 * l, r2 * r2 * r2]
}

/// A correction to the anchor within its own error bar is dropped: the
/// quadratic part multiplies it by `r²` and would swamp the lower terms.
fn significant(v: f64, err: f64) -> f64 {
    if v.abs() <= err {
        0.0
    } else {
        v
    }
}

/// Rounding floor below which a constraint miss is not corrected.
fn constraint_floor(target: f64) -> f64 {
    64.0 * f64::EPSILON * (1.0 + target.abs())
}

/// `A` from Richardson-extrapolated ring averages of `D²u`, projected once
/// onto `F(λ(A)) = C0`. Returns the error estimate alongside.
pub fn fit_a(sol: &ExteriorSolution, opts: &FitOptions) -> Result<(Sym2, f64)> {
    opts.validate(sol)?;
    let means = ring_means::<3, _>(&opts.radii, opts.n_theta, |r, th| {
        let h = sol.offset_jet(Vec2::polar(r, th))?.hess;
        Ok([h.m11, h.m12, h.m22])
    })?;
    let anchor = sol.anchor().a;
    check_decay(&opts.radii, &means, anchor.max_abs())?;
    let mut delta = [0.0; 3];
    let mut err = 0.0f64;
    for c in 0..3 {
        let ys: Vec<f64> = means.iter().map(|m| m[c]).collect();
        let (coef, e) = extrapolate(&opts.radii, &ys, &hess_basis)?;
        delta[c] = significant(coef[0], e[0]);
        err = err.max(e[0]);
    }
    let mut a = anchor + Sym2::new(delta[0], delta[1], delta[2]);
    let eq = &sol.equation;
    let res = eq.residual(&a)?;
    if res.abs() > constraint_floor(eq.target()) {
        let e = a.eigen();
        let (g1, g2) = eq.eigen_gradient(e.lambda1, e.lambda2)?;
        let n2 = g1 * g1 + g2 * g2;
        let (l1, l2) = (e.lambda1 - res * g1 / n2, e.lambda2 - res * g2 / n2);
        a = crate::operators::SymEigen {
            lambda1: l1,
            lambda2: l2,
            angle: e.angle,
        }
        .reconstruct();
        err = err.max(res.abs() / n2.sqrt());
    }
    Ok((a, err))
}

/// Inter-ring differences of the Hessian averages must shrink like `r^{-2}`:
/// the scaled difference on the outer half may exceed the inner half's by
/// at most a factor 10.
fn check_decay(radii: &[f64], means: &[[f64; 3]], scale: f64) -> Result<()> {
    let floor = 64.0 * f64::EPSILON * (1.0 + scale);
    let g: Vec<f64> = means
        .windows(2)
        .zip(radii)
        .map(|(w, r)| {
            let d = (0..3).fold(0.0f64, |m, c| m.max((w[1][c] - w[0][c]).abs()));
            (d - floor).max(0.0) * r * r
        })
        .collect();
    let half = g.len() / 2;
    let inner = g[..half.max(1)].iter().fold(0.0f64, |m, v| m.max(*v));
    let outer = g[half..].iter().fold(0.0f64, |m, v| m.max(*v));
    if !outer.is_finite() || outer > 10.0 * inner.max(floor * radii[0] * radii[0]) {
        return Err(Error::NotConverging(format!(
            "Hessian ring averages do not settle like r^-2 (outer {outer:.3e}, inner {inner:.3e})"
        )));
    }
    Ok(())
}

/// `(β, γ, d)` given `A`, each with an error bar.
pub fn fit_beta_gamma_d(
    sol: &ExteriorSolution,
    a: &Sym2,
    opts: &FitOptions,
) -> Result<(Vec2, f64, f64, [f64; 3])> {
    opts.validate(sol)?;
    let anchor = sol.anchor();
    let da = *a - anchor.a;
    let means = ring_means::<2, _>(&opts.radii, opts.n_theta, |r, th| {
        let x = Vec2::polar(r, th);
        let g = sol.offset_jet(x)?.grad - da.apply(x);
        Ok([g.x1, g.x2])
    })?;
    let mut db = [0.0; 2];
    let mut err_b = 0.0f64;
    for c in 0..2 {
        let ys: Vec<f64> = means.iter().map(|m| m[c]).collect();
        let (coef, e) = extrapolate(&opts.radii, &ys, &hess_basis)?;
        db[c] = significant(coef[0], e[0]);
        err_b = err_b.max(e[0]);
    }
    let dbeta = Vec2::new(db[0], db[1]);
    let q = sol.equation.q_matrix(a)?.scale(opts.q_scale);
    let (rhos, q_inv_half) = q_circles(&q, &opts.radii)?;
    let means = ring_means::<1, _>(&rhos, opts.n_theta, |rho, th| {
        let x = q_inv_half.apply(Vec2::polar(rho, th));
        Ok([sol.offset_jet(x)?.value - 0.5 * da.quad_form(x) - dbeta.dot(x)])
    })?;
    let ys: Vec<f64> = means.iter().map(|m| m[0]).collect();
    let (coef, e) = extrapolate(&rhos, &ys, &log_basis)?;
    Ok((anchor.beta + dbeta, anchor.gamma + coef[0], coef[1], [err_b, e[0], e[1]]))
}

/// Radii `ρ` of the ellipses `xᵀQx = ρ²` whose inner extent matches the
/// ladder, and `Q^{-1/2}`.
fn q_circles(q: &Sym2, radii: &[f64]) -> Result<(Vec<f64>, Sym2)> {
    let qi = q
        .inv_sqrt_pd()
        .ok_or_else(|| Error::InvalidArgument("Q is not positive definite".into()))?;
    let s = q.eigen().lambda2.sqrt();
    Ok((radii.iter().map(|r| r * s).collect(), qi))
}

/// `(d1, d2)` as limits of `(ρ/π)∮ W̃(ρ, θ)(cos θ, sin θ) dθ` on Q-circles.
pub fn fit_d1_d2(sol: &ExteriorSolution, c: &ExpansionCoeffs, opts: &FitOptions) -> Result<(f64, f64, f64)> {
    opts.validate(sol)?;
    let anchor = sol.anchor();
    let da = c.a - anchor.a;
    let dbeta = c.beta - anchor.beta;
    let dgamma = c.gamma - anchor.gamma;
    let (rhos, q_inv_half) = q_circles(&c.q, &opts.radii)?;
    let means = ring_means::<2, _>(&rhos, opts.n_theta, |rho, th| {
        let x = q_inv_half.apply(Vec2::polar(rho, th));
        let w = sol.offset_jet(x)?.value
            - 0.5 * da.quad_form(x)
            - dbeta.dot(x)
            - dgamma
            - c.d * 2.0 * rho.ln();
        Ok([2.0 * rho * w * th.cos(), 2.0 * rho * w * th.sin()])
    })?;
    let y1: Vec<f64> = means.iter().map(|m| m[0]).collect();
    let y2: Vec<f64> = means.iter().map(|m| m[1]).collect();
    let (c1, e1) = extrapolate(&rhos, &y1, &dipole_basis)?;
    let (c2, e2) = extrapolate(&rhos, &y2, &dipole_basis)?;
    Ok((c1[0], c2[0], e1[0].max(e2[0])))
}

/// The full coefficient set under `q_scale · Q_canonical`.
pub fn fit_expansion(sol: &ExteriorSolution, opts: &FitOptions) -> Result<ExpansionCoeffs> {
    let (a, err_a) = fit_a(sol, opts)?;
    let (beta, gamma, d, e) = fit_beta_gamma_d(sol, &a, opts)?;
    let q = sol.equation.q_matrix(&a)?.scale(opts.q_scale);
    let mut c = ExpansionCoeffs {
        a,
        beta,
        gamma,
        d,
        d1: 0.0,
        d2: 0.0,
        q,
        errors: CoeffErrors {
            a: err_a,
            beta: e[0],
            gamma: e[1],
            d: e[2],
            d1: 0.0,
            d2: 0.0,
        },
    };
    let (d1, d2, e12) = fit_d1_d2(sol, &c, opts)?;
    c.d1 = d1;
    c.d2 = d2;
    c.errors.d1 = e12;
    c.errors.d2 = e12;
    Ok(c)
}

/// Field-by-field comparison of fitted and true coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoeffDeviation {
    pub a: f64,
    pub beta: f64,
    pub gamma: f64,
    pub d: f64,
    pub d1: f64,
    pub d2: f64,
}

impl CoeffDeviation {
    pub fn between(fit: &ExpansionCoeffs, truth: &ExpansionCoeffs) -> Self {
        CoeffDeviation {
            a: fit.a.max_abs_diff(&truth.a),
            beta: (fit.beta - truth.beta).max_abs(),
            gamma: (fit.gamma - truth.gamma).abs(),
            d: (fit.d - truth.d).abs(),
            d1: (fit.d1 - truth.d1).abs(),
            d2: (fit.d2 - truth.d2).abs(),
        }
    }

    pub fn max(&self) -> f64 {
        [self.a, self.beta, self.gamma, self.d, self.d1, self.d2]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solutions::{ma_radial_exact, quadratic_solution, transform, AffineFrame};

    #[test]
    fn quadratic_exact() {
        let a = Sym2::new(2.0, 0.3, 1.0);
        let s = quadratic_solution(0.0, a, Vec2::new(0.5, -1.0), 2.0).unwrap();
        let c = fit_expansion(&s, &FitOptions::geometric(10.0, 1e4, 12, 32)).unwrap();
        assert!(c.a.max_abs_diff(&a) < 1e-14);
        assert_eq!((c.beta, c.gamma, c.d, c.d1, c.d2), (Vec2::new(0.5, -1.0), 2.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn ma_family_d() {
        let s = ma_radial_exact(0.0, 1.0).unwrap();
        let c = fit_expansion(&s, &FitOptions::for_solution(&s)).unwrap();
        assert!((c.d - 0.25).abs() < 1e-9, "d = {}", c.d);
        assert!(c.a.max_abs_diff(&Sym2::IDENTITY) < 1e-10);
        assert!(c.errors.d < 1e-6);
    }

    #[test]
    fn translated_dipole() {
        let base = ma_radial_exact(0.0, 1.0).unwrap();
        let s = transform(&base, AffineFrame::translation(Vec2::new(1.0, 0.0))).unwrap();
        let c = fit_expansion(&s, &FitOptions::for_solution(&s)).unwrap();
        assert!((c.beta.x1 + 1.0).abs() < 1e-8 && c.beta.x2.abs() < 1e-8);
        assert!((c.d1 + 0.5).abs() < 1e-8 && c.d2.abs() < 1e-8, "{} {}", c.d1, c.d2);
    }

    #[test]
    fn too_short_ladder_rejected() {
        let s = ma_radial_exact(0.0, 1.0).unwrap();
        assert!(fit_a(&s, &FitOptions::geometric(2.0, 50.0, 8, 32)).is_err());
    }
}
