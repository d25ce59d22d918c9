//! Circular Fourier analysis on rings and the exterior Poisson solver.
//!
//! Radii live on a geometric ladder `r_i = r0 e^{ih}`; radial derivatives
//! and integrals are taken in `t = ln r`, where the mode equation reads
//! `a_tt - k² a = r² b`.

mod quad;

use std::f64::consts::PI;
use std::io::{self, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lsq::lstsq;

pub use quad::{cumulative_from, power_log_tail, TailModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleKind {
    Scalar,
    Gradient,
    Hessian,
}

impl SampleKind {
    pub fn components(self) -> usize {
        match self {
            SampleKind::Scalar => 1,
            SampleKind::Gradient => 2,
            SampleKind::Hessian => 3,
        }
    }
}

/// Samples on concentric circles at uniform angles. For vector kinds the
/// components of each angle are stored consecutively.
#[derive(Debug, Clone, PartialEq)]
pub struct RingSamples {
    pub radii: Vec<f64>,
    pub thetas: Vec<f64>,
    pub kind: SampleKind,
    pub values: Vec<Vec<f64>>,
}

impl RingSamples {
    pub fn uniform_thetas(n_theta: usize) -> Vec<f64> {
        (0..n_theta).map(|j| 2.0 * PI * j as f64 / n_theta as f64).collect()
    }

    /// Scalar samples of `f(r, θ)`.
    pub fn from_fn(radii: &[f64], n_theta: usize, f: impl Fn(f64, f64) -> f64) -> Self {
        let thetas = Self::uniform_thetas(n_theta);
        let values = radii
            .iter()
            .map(|&r| thetas.iter().map(|&t| f(r, t)).collect())
            .collect();
        RingSamples {
            radii: radii.to_vec(),
            thetas,
            kind: SampleKind::Scalar,
            values,
        }
    }

    pub fn n_theta(&self) -> usize {
        self.thetas.len()
    }

    /// One component as scalar samples.
    pub fn component(&self, c: usize) -> RingSamples {
        let nc = self.kind.components();
        assert!(c < nc, "component {c} out of range");
        RingSamples {
            radii: self.radii.clone(),
            thetas: self.thetas.clone(),
            kind: SampleKind::Scalar,
            values: self
                .values
                .iter()
                .map(|ring| ring.iter().skip(c).step_by(nc).copied().collect())
                .collect(),
        }
    }

    /// Per-ring `sup |value|` (scalar kind).
    pub fn sup_per_ring(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|ring| ring.iter().fold(0.0f64, |m, v| m.max(v.abs())))
            .collect()
    }

    /// Trapezoidal `∫ g² dθ` per ring.
    pub fn l2_squared(&self) -> Vec<f64> {
        let w = 2.0 * PI / self.n_theta() as f64;
        self.values
            .iter()
            .map(|ring| w * ring.iter().map(|v| v * v).sum::<f64>())
            .collect()
    }

    /// CSV with columns `r, theta, value` (or `value_0, value_1, ...`).
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let nc = self.kind.components();
        let mut header = String::from("r,theta");
        if nc == 1 {
            header.push_str(",value");
        } else {
            for c in 0..nc {
                header.push_str(&format!(",value_{c}"));
            }
        }
        writeln!(w, "{header}")?;
        for (i, r) in self.radii.iter().enumerate() {
            for (j, th) in self.thetas.iter().enumerate() {
                write!(w, "{r:.16e},{th:.16e}")?;
                for c in 0..nc {
                    write!(w, ",{:.16e}", self.values[i][j * nc + c])?;
                }
                writeln!(w)?;
            }
        }
        Ok(())
    }
}

/// Geometric ladder of `n` radii from `r0` with log-spacing `h`.
pub fn ladder(r0: f64, h: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| r0 * (h * i as f64).exp()).collect()
}

/// Geometric ladder from `r0` to at least `r1` with log-spacing `h`.
pub fn ladder_between(r0: f64, r1: f64, h: f64) -> Vec<f64> {
    let n = ((r1 / r0).ln() / h).ceil() as usize + 1;
    ladder(r0, h, n)
}

/// `a_{k,m}(r)` or `b_{k,m}(r)` along the radii. `m = 1` is cos, `m = 2` sin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeSeries {
    pub k: usize,
    pub m: usize,
    pub radii: Vec<f64>,
    pub coeffs: Vec<f64>,
}

/// `Y_m^{(k)}(θ)`.
pub fn basis(k: usize, m: usize, theta: f64) -> f64 {
    if k == 0 {
        1.0 / (2.0 * PI).sqrt()
    } else if m == 1 {
        (k as f64 * theta).cos() / PI.sqrt()
    } else {
        (k as f64 * theta).sin() / PI.sqrt()
    }
}

/// Trapezoidal projections onto `Y_m^{(k)}`, `k ≤ kmax`, ordered by `k`
/// then `m`.
pub fn project_modes(rings: &RingSamples, kmax: usize) -> Result<Vec<ModeSeries>> {
    let n = rings.n_theta();
    if rings.kind != SampleKind::Scalar {
        return Err(Error::InvalidArgument("project_modes needs scalar samples".into()));
    }
    if 2 * kmax >= n {
        return Err(Error::Aliasing { kmax, n_theta: n });
    }
    let w = 2.0 * PI / n as f64;
    let mut out = Vec::with_capacity(2 * kmax + 1);
    for k in 0..=kmax {
        for m in 1..=(if k == 0 { 1 } else { 2 }) {
            let y: Vec<f64> = rings.thetas.iter().map(|&t| basis(k, m, t)).collect();
            let coeffs = rings
                .values
                .iter()
                .map(|ring| w * ring.iter().zip(&y).map(|(g, b)| g * b).sum::<f64>())
                .collect();
            out.push(ModeSeries {
                k,
                m,
                radii: rings.radii.clone(),
                coeffs,
            });
        }
    }
    Ok(out)
}

/// Rebuilds ring samples from modes on the given angles.
pub fn synthesize(modes: &[ModeSeries], thetas: &[f64]) -> RingSamples {
    let radii = modes.first().map(|m| m.radii.clone()).unwrap_or_default();
    let mut values = vec![vec![0.0; thetas.len()]; radii.len()];
    for md in modes {
        let y: Vec<f64> = thetas.iter().map(|&t| basis(md.k, md.m, t)).collect();
        for (i, ring) in values.iter_mut().enumerate() {
            for (v, b) in ring.iter_mut().zip(&y) {
                *v += md.coeffs[i] * b;
            }
        }
    }
    RingSamples {
        radii,
        thetas: thetas.to_vec(),
        kind: SampleKind::Scalar,
        values,
    }
}

/// Log-spacing of a geometric ladder.
fn ladder_step(radii: &[f64]) -> Result<f64> {
    if radii.len() < 7 {
        return Err(Error::InvalidArgument(format!(
            "mode solver needs at least 7 radii, got {}",
            radii.len()
        )));
    }
    let h = (radii[radii.len() - 1] / radii[0]).ln() / (radii.len() - 1) as f64;
    for (i, r) in radii.iter().enumerate() {
        let want = radii[0] * (h * i as f64).exp();
        if ((r - want) / want).abs() > 1e-10 {
            return Err(Error::InvalidArgument("radii must form a geometric ladder".into()));
        }
    }
    Ok(h)
}

/// Sign convention of the `k ≥ 1` particular solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSign {
    /// Variation of parameters, `a = -(r^k/2k)∫_r^∞ τ^{1-k}b - (r^{-k}/2k)K`.
    Validated,
    /// The opposite overall sign.
    Printed,
}

/// Mode-0 solution `a0 = ∫_r^∞ τ ln τ b dτ - ln r ∫_r^∞ τ b dτ`.
pub fn solve_mode0(b: &ModeSeries, tail: &TailModel) -> Result<ModeSeries> {
    let h = ladder_step(&b.radii)?;
    let r = &b.radii;
    let f_log: Vec<f64> = r.iter().zip(&b.coeffs).map(|(r, b)| r * r.ln() * b).collect();
    let f_lin: Vec<f64> = r.iter().zip(&b.coeffs).map(|(r, b)| r * b).collect();
    let last = *r.last().unwrap();
    let i_log = cumulative_from(&f_log, r, h, tail.integral(last, 1.0, 1.0)?);
    let i_lin = cumulative_from(&f_lin, r, h, tail.integral(last, 1.0, 0.0)?);
    let coeffs = r
        .iter()
        .enumerate()
        .map(|(i, r)| i_log[i] - r.ln() * i_lin[i])
        .collect();
    Ok(ModeSeries {
        k: 0,
        m: 1,
        radii: b.radii.clone(),
        coeffs,
    })
}

/// Mode-`k` solution selected by `k < k1 - 2` (both integrals to ∞) or
/// `k ≥ max(1, k1 - 2)` (the `r^{-k}` integral from the innermost radius).
pub fn solve_modek(k: usize, b: &ModeSeries, k1: f64, tail: &TailModel, sign: ModeSign) -> Result<ModeSeries> {
    if k == 0 {
        return solve_mode0(b, tail);
    }
    let h = ladder_step(&b.radii)?;
    let r = &b.radii;
    let kf = k as f64;
    let last = *r.last().unwrap();
    let fj: Vec<f64> = r.iter().zip(&b.coeffs).map(|(r, b)| r.powf(1.0 - kf) * b).collect();
    let fk: Vec<f64> = r.iter().zip(&b.coeffs).map(|(r, b)| r.powf(1.0 + kf) * b).collect();
    let j_int = cumulative_from(&fj, r, h, tail.integral(last, 1.0 - kf, 0.0)?);
    let k_int: Vec<f64> = if kf < k1 - 2.0 {
        cumulative_from(&fk, r, h, tail.integral(last, 1.0 + kf, 0.0)?)
            .into_iter()
            .map(|v| -v)
            .collect()
    } else {
        // ∫_{r0}^r = total - ∫_r^{R}
        let from_top = cumulative_from(&fk, r, h, 0.0);
        from_top.iter().map(|v| from_top[0] - v).collect()
    };
    let s = match sign {
        ModeSign::Validated => 1.0,
        ModeSign::Printed => -1.0,
    };
    let coeffs = r
        .iter()
        .enumerate()
        .map(|(i, r)| -s * (r.powf(kf) * j_int[i] + r.powf(-kf) * k_int[i]) / (2.0 * kf))
        .collect();
    Ok(ModeSeries {
        k,
        m: b.m,
        radii: b.radii.clone(),
        coeffs,
    })
}

const D2: [f64; 7] = [2.0, -27.0, 270.0, -490.0, 270.0, -27.0, 2.0];

/// Pointwise residual `a_tt - k²a - r²b` at interior radii (those with a
/// full 7-point stencil), relative to `|a_tt| + k²|a| + |r²b|`.
pub fn mode_residual(a: &ModeSeries, b: &ModeSeries) -> Result<Vec<(f64, f64)>> {
    let h = ladder_step(&a.radii)?;
    let k2 = (a.k * a.k) as f64;
    let n = a.radii.len();
    let mut out = Vec::with_capacity(n.saturating_sub(6));
    for i in 3..n - 3 {
        let att: f64 = (0..7).map(|j| D2[j] * a.coeffs[i + j - 3]).sum::<f64>() / (180.0 * h * h);
        let r = a.radii[i];
        let rhs = r * r * b.coeffs[i];
        let res = att - k2 * a.coeffs[i] - rhs;
        let scale = att.abs() + k2 * a.coeffs[i].abs() + rhs.abs();
        out.push((r, if scale > 0.0 { res / scale } else { res }));
    }
    Ok(out)
}

/// Largest relative mode residual.
pub fn max_mode_residual(a: &ModeSeries, b: &ModeSeries) -> Result<f64> {
    Ok(mode_residual(a, b)?.iter().fold(0.0f64, |m, (_, v)| m.max(v.abs())))
}

/// `r a'` on the ladder (centered 7-point first derivative in t, one-sided
/// rows dropped).
fn t_derivative(a: &ModeSeries, h: f64) -> Vec<(usize, f64)> {
    const D1: [f64; 7] = [-1.0, 9.0, -45.0, 0.0, 45.0, -9.0, 1.0];
    let n = a.coeffs.len();
    (3..n - 3)
        .map(|i| (i, (0..7).map(|j| D1[j] * a.coeffs[i + j - 3]).sum::<f64>() / (60.0 * h)))
        .collect()
}

/// Coefficient of the growing homogeneous solution (`r^k`, or `ln r` for
/// k = 0) carried by `a`, relative to the size of its two constituents.
pub fn growing_mode_ratio(a: &ModeSeries, b: &ModeSeries, tail: &TailModel) -> Result<f64> {
    let h = ladder_step(&a.radii)?;
    let r = &a.radii;
    let kf = a.k as f64;
    let last = *r.last().unwrap();
    let f: Vec<f64> = r.iter().zip(&b.coeffs).map(|(r, b)| r.powf(1.0 - kf) * b).collect();
    let tail_int = tail.integral(last, 1.0 - kf, 0.0)?;
    let j_int = cumulative_from(&f, r, h, tail_int);
    let mut worst = 0.0f64;
    let mut size = 0.0f64;
    for (i, ra) in t_derivative(a, h) {
        let (t1, t2) = if a.k == 0 {
            (ra, j_int[i])
        } else {
            (
                (ra + kf * a.coeffs[i]) / (2.0 * kf * r[i].powf(kf)),
                j_int[i] / (2.0 * kf),
            )
        };
        worst = worst.max((t1 + t2).abs());
        size = size.max(t1.abs() + t2.abs());
    }
    Ok(if size > 0.0 { worst / size } else { 0.0 })
}

/// Bound `|v| ≤ C r^{2-k1} (ln r)^{k2+1}` evidence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayCertificate {
    pub k1: f64,
    pub k2: f64,
    /// `sup_ring |v| r^{k1-2} (ln r)^{-k2-1}` over rings with `ln r > 0`.
    pub sup_ratio: f64,
    /// The same over the innermost third of those rings.
    pub sup_ratio_inner: f64,
    /// Absent when the samples vanish identically.
    pub slope_estimate: Option<f64>,
    pub slope_ci: Option<f64>,
}

impl DecayCertificate {
    /// No blow-up outward: `sup_ratio ≤ 10 · sup_ratio_inner`.
    pub fn is_sound(&self) -> bool {
        self.sup_ratio.is_finite() && self.sup_ratio <= 10.0 * self.sup_ratio_inner.max(f64::MIN_POSITIVE)
    }
}

pub fn certificate(radii: &[f64], sups: &[f64], k1: f64, k2: f64) -> Result<DecayCertificate> {
    let ratios: Vec<f64> = radii
        .iter()
        .zip(sups)
        .filter(|(r, _)| r.ln() > 0.0)
        .map(|(r, s)| s * r.powf(k1 - 2.0) * r.ln().powf(-k2 - 1.0))
        .collect();
    let sup_ratio = ratios.iter().fold(0.0f64, |m, v| m.max(*v));
    let third = (ratios.len() / 3).max(1).min(ratios.len());
    let sup_ratio_inner = ratios[..third].iter().fold(0.0f64, |m, v| m.max(*v));
    let fit = if sups.iter().all(|s| *s == 0.0) {
        None
    } else {
        Some(decay_slope(radii, sups, false)?)
    };
    Ok(DecayCertificate {
        k1,
        k2,
        sup_ratio,
        sup_ratio_inner,
        slope_estimate: fit.map(|f| f.slope),
        slope_ci: fit.map(|f| f.ci),
    })
}

/// Log-log regression of per-ring sup values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub ci: f64,
    /// Exponent of `ln r` when the correction term is enabled.
    pub log_exponent: Option<f64>,
    pub log_exponent_ci: Option<f64>,
}

/// Least-squares slope of `ln sup` against `ln r`, optionally with a
/// `ln ln r` term; `ci` is twice the standard error.
pub fn decay_slope(radii: &[f64], sups: &[f64], with_loglog: bool) -> Result<SlopeFit> {
    let pts: Vec<(f64, f64)> = radii
        .iter()
        .zip(sups)
        .filter(|(r, s)| **s > 0.0 && s.is_finite() && (!with_loglog || r.ln() > 0.0))
        .map(|(r, s)| (*r, *s))
        .collect();
    let decades = if pts.len() >= 2 {
        (pts[pts.len() - 1].0 / pts[0].0).log10()
    } else {
        0.0
    };
    if pts.len() < 6 || decades < 2.0 - 1e-9 {
        return Err(Error::InsufficientRings {
            rings: pts.len(),
            decades,
        });
    }
    let rows: Vec<Vec<f64>> = pts
        .iter()
        .map(|(r, _)| {
            let mut row = vec![1.0, r.ln()];
            if with_loglog {
                row.push(r.ln().ln());
            }
            row
        })
        .collect();
    let y: Vec<f64> = pts.iter().map(|(_, s)| s.ln()).collect();
    let fit = lstsq(&rows, &y, None)?;
    Ok(SlopeFit {
        slope: fit.coef[1],
        ci: 2.0 * fit.stderr[1],
        log_exponent: with_loglog.then(|| fit.coef[2]),
        log_exponent_ci: with_loglog.then(|| 2.0 * fit.stderr[2]),
    })
}

/// Output of [`poisson_solve`].
#[derive(Debug, Clone)]
pub struct PoissonSolution {
    pub v: RingSamples,
    pub certificate: DecayCertificate,
    pub modes: Vec<ModeSeries>,
    /// Largest relative mode-equation residual over interior rings.
    pub max_residual: f64,
    /// Largest relative growing-mode coefficient over all modes.
    pub max_growing_ratio: f64,
    /// Relative L² size of the part of `g` above `kmax`.
    pub truncation: f64,
}

/// Solves `Δv = g` outside a disk with `v` decaying, mode by mode.
pub fn poisson_solve(g: &RingSamples, k1: f64, k2: f64, kmax: usize) -> Result<PoissonSolution> {
    if !(k1 > 2.0) {
        return Err(Error::TailDivergence(format!("k1 = {k1} must exceed 2")));
    }
    let b_modes = project_modes(g, kmax)?;
    let peak = |b: &ModeSeries| b.coeffs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let global = b_modes.iter().map(peak).fold(0.0f64, f64::max);
    let solved: Vec<(ModeSeries, f64, f64)> = b_modes
        .par_iter()
        .map(|b| {
            let tail = TailModel::from_last(&b.radii, &b.coeffs, k1, k2);
            let a = solve_modek(b.k, b, k1, &tail, ModeSign::Validated)?;
            // modes at the projection rounding level carry no information
            if peak(b) <= 1e-13 * global {
                return Ok((a, 0.0, 0.0));
            }
            let res = max_mode_residual(&a, b)?;
            let grow = growing_mode_ratio(&a, b, &tail)?;
            Ok((a, res, grow))
        })
        .collect::<Result<Vec<_>>>()?;
    let max_residual = solved.iter().fold(0.0f64, |m, s| m.max(s.1));
    let max_growing_ratio = solved.iter().fold(0.0f64, |m, s| m.max(s.2));
    let modes: Vec<ModeSeries> = solved.into_iter().map(|s| s.0).collect();
    let v = synthesize(&modes, &g.thetas);
    let total = g.l2_squared();
    let captured: Vec<f64> = (0..g.radii.len())
        .map(|i| b_modes.iter().map(|m| m.coeffs[i] * m.coeffs[i]).sum())
        .collect();
    let truncation = total
        .iter()
        .zip(&captured)
        .map(|(t, c)| if *t > 0.0 { ((t - c).max(0.0) / t).sqrt() } else { 0.0 })
        .fold(0.0f64, f64::max);
    let certificate = certificate(&v.radii, &v.sup_per_ring(), k1, k2)?;
    Ok(PoissonSolution {
        v,
        certificate,
        modes,
        max_residual,
        max_growing_ratio,
        truncation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn series(k: usize, radii: &[f64], f: impl Fn(f64) -> f64) -> ModeSeries {
        ModeSeries {
            k,
            m: 1,
            radii: radii.to_vec(),
            coeffs: radii.iter().map(|&r| f(r)).collect(),
        }
    }

    #[test]
    fn projections() {
        let radii = [2.0];
        let one = RingSamples::from_fn(&radii, 32, |_, _| 1.0);
        let m = project_modes(&one, 4).unwrap();
        assert!((m[0].coeffs[0] - (2.0 * PI).sqrt()).abs() < 1e-14);
        assert!(m[1..].iter().all(|s| s.coeffs[0].abs() < 1e-14));
        let c = RingSamples::from_fn(&radii, 32, |_, t| t.cos());
        let m = project_modes(&c, 4).unwrap();
        assert!((m[1].coeffs[0] - PI.sqrt()).abs() < 1e-14);
        let g = RingSamples::from_fn(&radii, 32, |_, t| 3.0 * (2.0 * t).sin() - t.cos());
        let m = project_modes(&g, 4).unwrap();
        assert!((m[4].coeffs[0] - 3.0 * PI.sqrt()).abs() < 1e-14);
        assert!((m[1].coeffs[0] + PI.sqrt()).abs() < 1e-14);
        assert!(matches!(project_modes(&g, 16), Err(Error::Aliasing { .. })));
    }

    #[test]
    fn parseval() {
        let radii = [1.0, 2.0];
        let g = RingSamples::from_fn(&radii, 64, |r, t| r + (3.0 * t).cos() * 0.5 - 2.0 * (7.0 * t).sin());
        let m = project_modes(&g, 10).unwrap();
        let l2 = g.l2_squared();
        for i in 0..2 {
            let s: f64 = m.iter().map(|s| s.coeffs[i] * s.coeffs[i]).sum();
            assert!((s - l2[i]).abs() < 1e-12 * l2[i]);
        }
    }

    #[test]
    fn mode0_examples() {
        let radii = ladder_between(3.0, 1e3, 0.02);
        let b = series(0, &radii, |r| r.powi(-4));
        let tail = TailModel::from_last(&b.radii, &b.coeffs, 4.0, 0.0);
        let a = solve_mode0(&b, &tail).unwrap();
        for (i, r) in radii.iter().enumerate() {
            let want = 0.25 / (r * r);
            assert!(((a.coeffs[i] - want) / want).abs() < 1e-8);
        }
        assert!(max_mode_residual(&a, &b).unwrap() < 1e-8);
        let b = series(0, &radii, |r| r.powi(-3));
        let tail = TailModel::from_last(&b.radii, &b.coeffs, 3.0, 0.0);
        let a = solve_mode0(&b, &tail).unwrap();
        for (i, r) in radii.iter().enumerate() {
            assert!(((a.coeffs[i] - 1.0 / r) * r).abs() < 1e-8);
        }
        let zero = series(0, &radii, |_| 0.0);
        let a = solve_mode0(&zero, &TailModel::from_last(&zero.radii, &zero.coeffs, 4.0, 0.0)).unwrap();
        assert!(a.coeffs.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn modek_examples() {
        let radii = ladder_between(3.0, 1e3, 0.02);
        let b = series(1, &radii, |r| r.powi(-4));
        let tail = TailModel::from_last(&b.radii, &b.coeffs, 4.0, 0.0);
        let a = solve_modek(1, &b, 4.0, &tail, ModeSign::Validated).unwrap();
        for (i, r) in radii.iter().enumerate() {
            let want = r.powi(-2) / 3.0;
            assert!(((a.coeffs[i] - want) / want).abs() < 1e-8);
        }
        assert!(max_mode_residual(&a, &b).unwrap() < 1e-8);
        let printed = solve_modek(1, &b, 4.0, &tail, ModeSign::Printed).unwrap();
        assert!(max_mode_residual(&printed, &b).unwrap() > 0.1);

        let b = series(2, &radii, |r| r.powi(-6));
        let tail = TailModel::from_last(&b.radii, &b.coeffs, 6.0, 0.0);
        let a = solve_modek(2, &b, 6.0, &tail, ModeSign::Validated).unwrap();
        for (i, r) in radii.iter().enumerate() {
            let want = r.powi(-4) / 12.0;
            assert!(((a.coeffs[i] - want) / want).abs() < 1e-8);
        }
    }

    #[test]
    fn modek_finite_base_branch() {
        // k = 3 >= k1 - 2 = 2: decaying homogeneous part allowed
        let radii = ladder_between(3.0, 1e3, 0.02);
        let b = series(3, &radii, |r| r.powi(-4));
        let tail = TailModel::from_last(&b.radii, &b.coeffs, 4.0, 0.0);
        let a = solve_modek(3, &b, 4.0, &tail, ModeSign::Validated).unwrap();
        assert!(max_mode_residual(&a, &b).unwrap() < 1e-8);
        assert!(growing_mode_ratio(&a, &b, &tail).unwrap() < 1e-8);
    }

    #[test]
    fn poisson_two_modes() {
        let radii = ladder_between(3.0, 1e3, 0.02);
        let g = RingSamples::from_fn(&radii, 32, |r, t| r.powi(-4) * (1.0 + t.cos()));
        let sol = poisson_solve(&g, 4.0, 0.0, 4).unwrap();
        for (i, r) in radii.iter().enumerate() {
            for (j, t) in sol.v.thetas.iter().enumerate() {
                let want = 0.25 / (r * r) + t.cos() / (3.0 * r * r);
                assert!((sol.v.values[i][j] - want).abs() < 1e-8 * 0.6 / (r * r));
            }
        }
        assert!(sol.max_residual < 1e-8);
        assert!(sol.certificate.is_sound());
        let zero = RingSamples::from_fn(&radii, 32, |_, _| 0.0);
        let s0 = poisson_solve(&zero, 4.0, 0.0, 4).unwrap();
        assert!(s0.v.values.iter().flatten().all(|v| *v == 0.0));
        assert!(s0.certificate.slope_estimate.is_none() && s0.certificate.is_sound());
    }

    #[test]
    fn slope_examples() {
        let radii = ladder(10.0, 0.1, 48);
        let sups: Vec<f64> = radii.iter().map(|r| r.powi(-2)).collect();
        let f = decay_slope(&radii, &sups, false).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-10);
        let sups: Vec<f64> = radii.iter().map(|r| r.powi(-2) * r.ln()).collect();
        let f = decay_slope(&radii, &sups, true).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-8 && (f.log_exponent.unwrap() - 1.0).abs() < 1e-8);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let sups: Vec<f64> = radii.iter().map(|r| (1.0 + 0.01 * rng.gen_range(-1.0..1.0)) / r).collect();
        let f = decay_slope(&radii, &sups, false).unwrap();
        assert!((f.slope + 1.0).abs() < 0.05);
        assert!(matches!(
            decay_slope(&radii[..5], &sups[..5], false),
            Err(Error::InsufficientRings { .. })
        ));
    }
}
