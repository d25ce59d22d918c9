//! Radial quadrature on geometric ladders and analytic power-log tails.

use statrs::function::gamma::{gamma, gamma_ur};

use crate::error::{Error, Result};

/// `c ∫_r^∞ τ^{-1-s} (ln τ)^n dτ = c Γ(n+1, s ln r) / s^{n+1}`, for `r > 1`,
/// `s > 0`, `n > -1`.
pub fn power_log_tail(c: f64, s: f64, n: f64, r: f64) -> Result<f64> {
    if c == 0.0 {
        return Ok(0.0);
    }
    if !(s > 0.0) {
        return Err(Error::TailDivergence(format!("tail exponent s = {s} must be positive")));
    }
    if !(r > 1.0) || !(n > -1.0) {
        return Err(Error::TailDivergence(format!("power-log tail needs r > 1 and n > -1, got r = {r}, n = {n}")));
    }
    let l = r.ln();
    if n == 0.0 {
        return Ok(c * r.powf(-s) / s);
    }
    if n == 1.0 {
        return Ok(c * r.powf(-s) * (s * l + 1.0) / (s * s));
    }
    let a = n + 1.0;
    Ok(c * gamma_ur(a, s * l) * gamma(a) / s.powf(a))
}

/// Outer model `b(r) ≈ c r^{-k1} (ln r)^{k2}` for the part of a mode beyond
/// the last sampled radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailModel {
    pub c: f64,
    pub k1: f64,
    pub k2: f64,
}

impl TailModel {
    /// Matches the model to the outermost sample.
    pub fn from_last(radii: &[f64], coeffs: &[f64], k1: f64, k2: f64) -> Self {
        let (r, b) = match (radii.last(), coeffs.last()) {
            (Some(r), Some(b)) => (*r, *b),
            _ => return TailModel { c: 0.0, k1, k2 },
        };
        let base = r.powf(-k1) * if k2 == 0.0 { 1.0 } else { r.ln().powf(k2) };
        let c = if base > 0.0 && base.is_finite() { b / base } else { 0.0 };
        TailModel { c, k1, k2 }
    }

    /// `∫_R^∞ τ^m (ln τ)^j · model(τ) dτ`.
    pub fn integral(&self, r: f64, m: f64, j: f64) -> Result<f64> {
        power_log_tail(self.c, self.k1 - m - 1.0, self.k2 + j, r)
    }
}

const GL4_X: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GL4_W: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

/// `w[l] = ∫_q^{q+1} L_l(x) dx` for Lagrange basis on nodes `0..n`.
fn interval_weights(n: usize, q: usize) -> Vec<f64> {
    (0..n)
        .map(|l| {
            GL4_X
                .iter()
                .zip(&GL4_W)
                .map(|(xg, wg)| {
                    let x = q as f64 + 0.5 * (1.0 + xg);
                    let basis: f64 = (0..n)
                        .filter(|&i| i != l)
                        .map(|i| (x - i as f64) / (l as f64 - i as f64))
                        .product();
                    0.5 * wg * basis
                })
                .sum()
        })
        .collect()
}

/// `∫_{r_i}^{r_last} f dr + tail` for every ladder radius, integrating
/// `f(e^t) e^t` in `t` with local degree-6 interpolation.
pub fn cumulative_from(f: &[f64], radii: &[f64], h: f64, tail: f64) -> Vec<f64> {
    let n = radii.len();
    let mut out = vec![tail; n];
    if n < 2 {
        return out;
    }
    let g: Vec<f64> = f.iter().zip(radii).map(|(f, r)| f * r).collect();
    let nw = n.min(7);
    let table: Vec<Vec<f64>> = (0..nw - 1).map(|q| interval_weights(nw, q)).collect();
    let mut acc = tail;
    for j in (0..n - 1).rev() {
        let start = j.saturating_sub(3).min(n - nw);
        let w = &table[j - start];
        let piece: f64 = w.iter().enumerate().map(|(l, w)| w * g[start + l]).sum();
        acc += h * piece;
        out[j] = acc;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one() {
        for q in 0..6 {
            let s: f64 = interval_weights(7, q).iter().sum();
            assert!((s - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn cumulative_power() {
        let h = 0.02;
        let radii: Vec<f64> = (0..300).map(|i| 2.0 * (h * i as f64).exp()).collect();
        let f: Vec<f64> = radii.iter().map(|r| r.powi(-3)).collect();
        let last = *radii.last().unwrap();
        let tail = power_log_tail(1.0, 2.0, 0.0, last).unwrap();
        let c = cumulative_from(&f, &radii, h, tail);
        for (i, r) in radii.iter().enumerate() {
            let want = 0.5 / (r * r);
            assert!(((c[i] - want) / want).abs() < 1e-11);
        }
    }

    #[test]
    fn tail_log_power() {
        // ∫_e^∞ τ^{-3} ln τ dτ = e^{-2}(2 + 1)/4
        let r = std::f64::consts::E;
        let want = (-2.0f64).exp() * 3.0 / 4.0;
        assert!((power_log_tail(1.0, 2.0, 1.0, r).unwrap() - want).abs() < 1e-15);
        // n = 2 goes through the incomplete gamma: e^{-2}(1/2 + 1/2 + 1/4)
        let via_gamma = power_log_tail(1.0, 2.0, 2.0, r).unwrap();
        assert!((via_gamma - 1.25 * (-2.0f64).exp()).abs() < 1e-12);
        let half = power_log_tail(1.0, 2.0, 0.5, r).unwrap();
        assert!(half > 0.0 && half.is_finite());
        assert!(matches!(power_log_tail(1.0, 0.0, 0.0, r), Err(Error::TailDivergence(_))));
    }

    #[test]
    fn model_from_last() {
        let radii = [10.0, 20.0];
        let t = TailModel::from_last(&radii, &[0.0, 3.0 * 20f64.powi(-4)], 4.0, 0.0);
        assert!((t.c - 3.0).abs() < 1e-13);
        // ∫_20^∞ τ · 3τ^-4 = 3/(2·400)
        assert!((t.integral(20.0, 1.0, 0.0).unwrap() - 3.0 / 800.0).abs() < 1e-16);
    }
}
