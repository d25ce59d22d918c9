//! Remainder decay, reflection symmetry, radiality and linearization checks.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coeffs::ExpansionCoeffs;
use crate::error::{Error, Result};
use crate::harmonics::{certificate, DecayCertificate};
use crate::operators::{Sym2, Vec2};
use crate::solutions::{AffineFrame, ExteriorSolution};

/// Per-ring sup of a quantity and its log-log slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub radii: Vec<f64>,
    pub sups: Vec<f64>,
    pub certificate: DecayCertificate,
    /// Pass threshold on the slope.
    pub max_slope: f64,
    /// All sups at rounding level.
    pub trivial: bool,
}

impl DecayReport {
    pub fn passes(&self) -> bool {
        self.trivial
            || self
                .certificate
                .slope_estimate
                .map_or(false, |s| s <= self.max_slope)
    }
}

fn ring_sups<F>(radii: &[f64], n_theta: usize, f: F) -> Result<Vec<f64>>
where
    F: Fn(Vec2) -> Result<f64> + Sync,
{
    radii
        .par_iter()
        .map(|&r| {
            let mut m = 0.0f64;
            for j in 0..n_theta {
                let th = 2.0 * PI * j as f64 / n_theta as f64;
                m = m.max(f(Vec2::polar(r, th))?.abs());
            }
            Ok(m)
        })
        .collect()
}

fn decay_report(radii: &[f64], sups: Vec<f64>, floor: f64) -> Result<DecayReport> {
    let trivial = sups.iter().all(|s| *s <= floor);
    let cert = if trivial {
        certificate(radii, &vec![0.0; sups.len()], 4.0, 0.0)?
    } else {
        certificate(radii, &sups, 4.0, 0.0)?
    };
    Ok(DecayReport {
        radii: radii.to_vec(),
        sups,
        certificate: cert,
        max_slope: -1.8,
        trivial,
    })
}

/// `u(x) - expansion(x)`, formed against the anchor so that the quadratic
/// part cancels exactly.
pub fn remainder_at(sol: &ExteriorSolution, c: &ExpansionCoeffs, x: Vec2) -> Result<f64> {
    let anchor = sol.anchor();
    let da = c.a - anchor.a;
    let db = c.beta - anchor.beta;
    let dg = c.gamma - anchor.gamma;
    let off = sol.offset_jet(x)?.value;
    Ok(off - (0.5 * da.quad_form(x) + db.dot(x) + dg) - c.log_and_dipole(x))
}

/// `sup_ring |u - expansion|` over the ladder, with slope ≤ -1.8 to pass.
pub fn remainder_check(
    sol: &ExteriorSolution,
    c: &ExpansionCoeffs,
    radii: &[f64],
    n_theta: usize,
) -> Result<DecayReport> {
    let sups = ring_sups(radii, n_theta, |x| remainder_at(sol, c, x))?;
    let scale = c.gamma.abs() + c.beta.max_abs() + c.d.abs() + 1.0;
    decay_report(radii, sups, 1e-13 * scale)
}

/// `sup_ring ‖DF(D²u) - DF(A)‖` over the ladder.
pub fn linearization_check(sol: &ExteriorSolution, a: &Sym2, radii: &[f64], n_theta: usize) -> Result<DecayReport> {
    let eq = &sol.equation;
    let df_inf = eq.df_matrix(a)?;
    let sups = ring_sups(radii, n_theta, |x| {
        let h = sol.hessian(x)?;
        Ok(eq.df_matrix(&h)?.max_abs_diff(&df_inf))
    })?;
    decay_report(radii, sups, 1e-14 * (1.0 + df_inf.max_abs()))
}

/// `|Q - ½(DF(A))⁻¹|` entrywise.
pub fn q_consistency(sol: &ExteriorSolution, a: &Sym2) -> Result<f64> {
    let q = sol.equation.q_matrix(a)?;
    let df = sol.equation.df_matrix(a)?;
    let half_inv = df
        .inverse()
        .ok_or_else(|| Error::InvalidArgument("DF(A) is singular".into()))?
        .scale(0.5);
    Ok(q.max_abs_diff(&half_inv))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetryReport {
    pub max_violation: f64,
    pub reflections_tested: usize,
    pub samples: usize,
    /// Rotation to the eigenframe of `A`.
    pub frame: AffineFrame,
}

/// Reflection identity `u(x̃) - β·x̃ = u(x) - β·x` for the three nontrivial
/// sign patterns in the eigenframe of `A`, at `n_samples` seeded points
/// with `r_in ≤ |x| ≤ 10 r_in`.
pub fn symmetry_check(sol: &ExteriorSolution, c: &ExpansionCoeffs, n_samples: usize, seed: u64) -> Result<SymmetryReport> {
    let e = c.a.eigen();
    let frame = e.frame();
    let r_in = if sol.r_min > 0.0 { 1.05 * sol.r_min } else { 1.0 };
    let r_out = sol.r_max.map_or(10.0 * r_in, |m| m.min(10.0 * r_in));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<Vec2> = (0..n_samples)
        .map(|_| Vec2::polar(rng.gen_range(r_in..r_out), rng.gen_range(0.0..2.0 * PI)))
        .collect();
    let patterns = [(-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)];
    let h = |x: Vec2| -> Result<f64> { Ok(sol.value(x)? - c.beta.dot(x)) };
    let worst = pts
        .par_iter()
        .map(|&x| {
            let base = h(x)?;
            let y = frame.transpose().apply(x);
            let mut m = 0.0f64;
            for (s1, s2) in patterns {
                let xt = frame.apply(Vec2::new(s1 * y.x1, s2 * y.x2));
                m = m.max((h(xt)? - base).abs());
            }
            Ok(m)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0f64, f64::max);
    Ok(SymmetryReport {
        max_violation: worst,
        reflections_tested: patterns.len(),
        samples: n_samples,
        frame: AffineFrame {
            rotation_angle: e.angle,
            x0: Vec2::ZERO,
            beta_add: Vec2::ZERO,
            gamma_add: 0.0,
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialityReport {
    pub k: f64,
    /// `q = ½xᵀ(A+KI)x` on each tested level.
    pub levels: Vec<f64>,
    /// Spread of `u + ½K|x|²` along each level set.
    pub spreads: Vec<f64>,
    /// Mean of `u + ½K|x|²` on each level.
    pub means: Vec<f64>,
}

impl RadialityReport {
    pub fn passes(&self) -> bool {
        self.spreads
            .iter()
            .zip(&self.means)
            .all(|(s, m)| *s <= 1e-8 * (1.0 + m.abs()))
    }
}

/// Spread of `u + ½K|x|²` on level sets of `½xᵀ(A+KI)x`.
pub fn radiality_check(sol: &ExteriorSolution, k: f64, a: &Sym2, n_levels: usize, n_theta: usize) -> Result<RadialityReport> {
    let m = a.add_scalar(k);
    if !m.is_positive_definite() {
        return Err(Error::InvalidArgument("A + KI must be positive definite".into()));
    }
    let e = m.eigen();
    let m_inv_half = m.inv_sqrt_pd().expect("positive definite");
    // the ellipse √(2q) M^{-1/2} S¹ has inner radius √(2q/λmax)
    let r_in = if sol.r_min > 0.0 { 1.5 * sol.r_min } else { 1.0 };
    let q_lo = 0.5 * r_in * r_in * e.lambda2;
    let mut levels = Vec::with_capacity(n_levels);
    let mut spreads = Vec::with_capacity(n_levels);
    let mut means = Vec::with_capacity(n_levels);
    let anchor = sol.anchor();
    for i in 0..n_levels {
        let q = q_lo * 4f64.powi(i as i32);
        let rho = (2.0 * q).sqrt();
        // deviation from the level value q, so q itself never rounds in
        let dev = (0..n_theta)
            .map(|j| {
                let th = 2.0 * PI * j as f64 / n_theta as f64;
                let x = m_inv_half.apply(Vec2::polar(rho, th));
                let quad = 0.5 * anchor.a.add_scalar(k).quad_form(x) - q;
                Ok(quad + anchor.beta.dot(x) + anchor.gamma + sol.offset_jet(x)?.value)
            })
            .collect::<Result<Vec<f64>>>()?;
        let lo = dev.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = dev.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        levels.push(q);
        spreads.push(hi - lo);
        means.push(q + dev.iter().sum::<f64>() / n_theta as f64);
    }
    Ok(RadialityReport {
        k,
        levels,
        spreads,
        means,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asymptotics::{fit_expansion, FitOptions};
    use crate::solutions::{ma_radial_exact, perturb, quadratic_solution, transform};

    #[test]
    fn ma_remainder_slope() {
        let s = ma_radial_exact(0.0, 1.0).unwrap();
        let c = fit_expansion(&s, &FitOptions::for_solution(&s)).unwrap();
        let radii = FitOptions::geometric(100.0, 1e4, 20, 64).radii;
        let r = remainder_check(&s, &c, &radii, 64).unwrap();
        let slope = r.certificate.slope_estimate.unwrap();
        assert!((slope + 2.0).abs() < 0.1, "slope {slope}");
        assert!(r.passes());
    }

    #[test]
    fn quadratic_remainder_trivial() {
        let s = quadratic_solution(0.0, Sym2::new(2.0, 0.1, 1.0), Vec2::new(1.0, 0.0), 0.5).unwrap();
        let r = remainder_check(&s, &s.truth.unwrap(), &FitOptions::geometric(100.0, 1e4, 10, 32).radii, 32).unwrap();
        assert!(r.trivial && r.passes());
    }

    #[test]
    fn symmetry_and_control() {
        let base = ma_radial_exact(0.0, 1.0).unwrap();
        let beta = Vec2::new(0.3, -0.7);
        let s = transform(
            &base,
            AffineFrame {
                rotation_angle: 0.0,
                x0: Vec2::ZERO,
                beta_add: beta,
                gamma_add: 0.0,
            },
        )
        .unwrap();
        let c = s.truth.unwrap();
        let rep = symmetry_check(&s, &c, 1000, 3).unwrap();
        assert!(rep.max_violation < 1e-10, "{}", rep.max_violation);
        let bad = perturb(&s, 1e-3);
        let rep = symmetry_check(&bad, &c, 1000, 3).unwrap();
        assert!(rep.max_violation > 1e-4);
    }

    #[test]
    fn radiality_ma_and_control() {
        let s = ma_radial_exact(0.0, 1.0).unwrap();
        let rep = radiality_check(&s, 0.0, &Sym2::IDENTITY, 5, 64).unwrap();
        assert!(rep.passes(), "{rep:?}");
        let bad = perturb(&s, 1e-3);
        assert!(!radiality_check(&bad, 0.0, &Sym2::IDENTITY, 5, 64).unwrap().passes());
    }

    #[test]
    fn proposition_half_inverse() {
        let s = ma_radial_exact(0.4, 1.0).unwrap();
        let a = s.truth.unwrap().a;
        assert!(q_consistency(&s, &a).unwrap() < 1e-12);
    }

    #[test]
    fn linearization_decays() {
        let s = ma_radial_exact(0.0, 1.0).unwrap();
        let radii = FitOptions::geometric(100.0, 1e4, 12, 32).radii;
        let r = linearization_check(&s, &Sym2::IDENTITY, &radii, 32).unwrap();
        assert!(r.passes(), "{:?}", r.certificate);
    }
}
