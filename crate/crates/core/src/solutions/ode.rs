//! Radial profiles by adaptive Dormand–Prince integration.
//!
//! The state is carried in `t = ln r` relative to the isotropic solution
//! `½α r²`: with `U' = αr + e` and `U = ½αr² + E`, the unknowns are
//! `η = r e` and `E`, both of which level off as `r → ∞`.

use std::sync::Arc;

use super::radial::RadialExact;
use super::{radial_truth, ExteriorSolution, Field, Jet, Quadratic, SolutionDescriptor};
use crate::error::{Error, Result};
use crate::operators::{Equation, Sym2, TauParams, Vec2};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Embedded Runge–Kutta 5(4) integrator with error-per-step control.
#[derive(Debug, Clone, Copy)]
pub struct Dopri5 {
    pub atol: f64,
    pub rtol: f64,
    pub h_init: f64,
    pub max_steps: usize,
}

impl Default for Dopri5 {
    fn default() -> Self {
        Dopri5 {
            atol: 1e-12,
            rtol: 1e-12,
            h_init: 1e-3,
            max_steps: 1_000_000,
        }
    }
}

impl Dopri5 {
    /// One step; returns the 5th-order solution and the embedded error.
    pub fn step<const N: usize, F>(f: &F, t: f64, y: &[f64; N], h: f64) -> Result<([f64; N], [f64; N])>
    where
        F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
    {
        let mut k = [[0.0; N]; 7];
        for i in 0..7 {
            let mut yi = *y;
            for (j, kj) in k.iter().enumerate().take(i) {
                for n in 0..N {
                    yi[n] += h * A[i][j] * kj[n];
                }
            }
            k[i] = f(t + C[i] * h, &yi)?;
        }
        let mut y5 = *y;
        let mut err = [0.0; N];
        for i in 0..7 {
            for n in 0..N {
                y5[n] += h * B5[i] * k[i][n];
                err[n] += h * (B5[i] - B4[i]) * k[i][n];
            }
        }
        Ok((y5, err))
    }

    /// Integrates from `t0` to `t1 > t0`, returning every accepted node.
    pub fn integrate<const N: usize, F>(
        &self,
        f: &F,
        t0: f64,
        y0: [f64; N],
        t1: f64,
    ) -> Result<Vec<(f64, [f64; N])>>
    where
        F: Fn(f64, &[f64; N]) -> Result<[f64; N]>,
    {
        let mut nodes = vec![(t0, y0)];
        let (mut t, mut y) = (t0, y0);
        let mut h = self.h_init.min(t1 - t0);
        let mut steps = 0;
        while t < t1 {
            steps += 1;
            if steps > self.max_steps {
                return Err(Error::NotConverging(format!("ODE step limit at t = {t}")));
            }
            let last = t + h >= t1;
            let hh = if last { t1 - t } else { h };
            let (yn, err) = Self::step(f, t, &y, hh)?;
            let mut norm = 0.0f64;
            for n in 0..N {
                let sc = self.atol + self.rtol * y[n].abs().max(yn[n].abs());
                norm = norm.max((err[n] / sc).abs());
            }
            if norm <= 1.0 {
                t = if last { t1 } else { t + hh };
                y = yn;
                nodes.push((t, y));
            }
            let factor = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
            h = hh * factor;
            if h < 1e-14 * t.abs().max(1.0) {
                return Err(Error::NotConverging(format!("ODE step size underflow at t = {t}")));
            }
        }
        Ok(nodes)
    }
}

/// A radial solution `U(r)` sampled at the integrator's accepted nodes.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    pub r_grid: Vec<f64>,
    /// `U'(r)`.
    pub p: Vec<f64>,
    /// `U''(r)`.
    pub dp: Vec<f64>,
    /// `U(r)`, normalized by `U(r0) = ½αr0²`.
    pub u: Vec<f64>,
    pub tau: TauParams,
    pub c0: f64,
    pub alpha: f64,
    pub r0: f64,
    pub p0: f64,
    pub r_max: f64,
    equation: Equation,
    nodes: Vec<(f64, [f64; 2])>,
}

fn rhs(eq: &Equation, alpha: f64, t: f64, y: &[f64; 2]) -> Result<[f64; 2]> {
    let r2 = (2.0 * t).exp();
    let delta = y[0] / r2;
    let ds = eq
        .deviation_sum(alpha, delta)
        .map_err(|_| Error::AdmissibilityLost { r: t.exp() })?;
    Ok([r2 * ds, y[0]])
}

/// Integrates the radial reduction `F(U'', U'/r) = C0` from `U'(r0) = p0`.
pub fn radial_ode_solve(p: TauParams, c0: f64, r0: f64, p0: f64, rmax: f64) -> Result<RadialProfile> {
    if !(r0 > 0.0 && rmax > r0 && rmax.is_finite() && p0.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need 0 < r0 < rmax, got r0 = {r0}, rmax = {rmax}"
        )));
    }
    p.check_c0(c0)?;
    let eq = Equation::Tau { params: p, c0 };
    let alpha = eq.anchor_eigenvalue()?;
    let l2 = p0 / r0;
    if !p.is_admissible(l2) || eq.partner(l2).is_err() {
        return Err(Error::RangeExceeded {
            c0,
            reason: format!("no admissible partner for U'/r = {l2} at r0 = {r0}"),
        });
    }
    let eta0 = r0 * (p0 - alpha * r0);
    let f = |t: f64, y: &[f64; 2]| rhs(&eq, alpha, t, y);
    let nodes = Dopri5::default().integrate(&f, r0.ln(), [eta0, 0.0], rmax.ln())?;

    let mut prof = RadialProfile {
        r_grid: Vec::with_capacity(nodes.len()),
        p: Vec::with_capacity(nodes.len()),
        dp: Vec::with_capacity(nodes.len()),
        u: Vec::with_capacity(nodes.len()),
        tau: p,
        c0,
        alpha,
        r0,
        p0,
        r_max: rmax,
        equation: eq,
        nodes: Vec::new(),
    };
    for &(t, y) in &nodes {
        let r = t.exp();
        let delta = y[0] / (r * r);
        let dev = eq
            .partner_deviation(alpha, delta)
            .map_err(|_| Error::AdmissibilityLost { r })?;
        if !(p.is_admissible(alpha + delta) && p.is_admissible(alpha + dev)) {
            return Err(Error::AdmissibilityLost { r });
        }
        prof.r_grid.push(r);
        prof.p.push(alpha * r + y[0] / r);
        prof.dp.push(alpha + dev);
        prof.u.push(0.5 * alpha * r * r + y[1]);
    }
    prof.nodes = nodes;
    Ok(prof)
}

impl RadialProfile {
    /// `(η, E)` at radius `r` by one RK step from the nearest node below.
    fn state(&self, r: f64) -> Result<[f64; 2]> {
        let t = r.ln();
        let idx = self.nodes.partition_point(|(tn, _)| *tn <= t);
        let i = idx.saturating_sub(1);
        let (ti, yi) = self.nodes[i];
        if t <= ti || i + 1 == self.nodes.len() && t - ti < 1e-15 {
            return Ok(yi);
        }
        let f = |tt: f64, y: &[f64; 2]| rhs(&self.equation, self.alpha, tt, y);
        Ok(Dopri5::step(&f, ti, &yi, t - ti)?.0)
    }

    /// `max |F(U'', U'/r) - C0|` over the nodes.
    pub fn max_residual(&self) -> f64 {
        self.r_grid
            .iter()
            .enumerate()
            .map(|(i, r)| {
                crate::operators::f_tau(&self.tau, self.dp[i], self.p[i] / r)
                    .map(|v| (v - self.c0).abs())
                    .unwrap_or(f64::INFINITY)
            })
            .fold(0.0, f64::max)
    }

    pub fn equation(&self) -> Equation {
        self.equation
    }

    /// Constant `k` of the closed form `U' + s r = σ sqrt(P r² + k)` through
    /// the initial data, when the equation has a three-term form.
    pub fn closed_form_k(&self) -> Option<f64> {
        let rad = RadialExact::new(&self.equation, 0.0).ok()?;
        let e0 = self.p0 - self.alpha * self.r0;
        Some(e0 * (e0 + 2.0 * rad.sigma * rad.p.sqrt() * self.r0))
    }

    pub fn into_solution(self) -> Result<ExteriorSolution> {
        let descriptor = SolutionDescriptor::RadialOde {
            tau: self.tau.tau,
            c0: self.c0,
            r0: self.r0,
            p0: self.p0,
            r_max: self.r_max,
        };
        self.into_solution_with(descriptor)
    }

    pub(crate) fn into_solution_with(self, descriptor: SolutionDescriptor) -> Result<ExteriorSolution> {
        let truth = match self.closed_form_k() {
            Some(k) => {
                let mut t = radial_truth(&self.equation, k)?;
                let rad = RadialExact::new(&self.equation, k)?;
                t.gamma -= rad.offset_profile(self.r0).0;
                Some(t)
            }
            None => None,
        };
        Ok(ExteriorSolution {
            r_min: self.r0,
            r_max: Some(self.r_max),
            equation: self.equation,
            truth,
            descriptor,
            field: Arc::new(self),
        })
    }
}

impl Field for RadialProfile {
    fn anchor(&self) -> Quadratic {
        Quadratic::new(Sym2::scalar(self.alpha), Vec2::ZERO, 0.0)
    }

    fn offset(&self, x: Vec2) -> Result<Jet> {
        let r = x.norm();
        let [eta, e_val] = self.state(r)?;
        let delta = eta / (r * r);
        let dev = self
            .equation
            .partner_deviation(self.alpha, delta)
            .map_err(|_| Error::AdmissibilityLost { r })?;
        Ok(Jet::radial(x, e_val, eta / r, dev))
    }
}
