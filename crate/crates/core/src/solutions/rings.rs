use rayon::prelude::*;

use super::{ExteriorSolution, Jet};
use crate::error::{Error, Result};
use crate::harmonics::{RingSamples, SampleKind};
use crate::operators::Vec2;

/// Value, gradient and Hessian samples on concentric rings.
#[derive(Debug, Clone, PartialEq)]
pub struct RingJets {
    pub value: RingSamples,
    pub gradient: RingSamples,
    pub hessian: RingSamples,
}

/// Samples `sol` at `θ_j = 2πj/n_theta` on every radius. Rings are
/// evaluated in parallel and assembled in input order.
pub fn sample_rings(sol: &ExteriorSolution, radii: &[f64], n_theta: usize) -> Result<RingJets> {
    if n_theta < 8 || n_theta % 2 != 0 {
        return Err(Error::InvalidArgument(format!("n_theta = {n_theta} must be even and >= 8")));
    }
    if radii.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument("radii must be strictly increasing".into()));
    }
    let thetas = RingSamples::uniform_thetas(n_theta);
    let rings: Vec<Vec<Jet>> = radii
        .par_iter()
        .map(|&r| {
            thetas
                .iter()
                .map(|&th| sol.jet(Vec2::polar(r, th)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let pack = |kind: SampleKind, f: &dyn Fn(&Jet) -> Vec<f64>| RingSamples {
        radii: radii.to_vec(),
        thetas: thetas.clone(),
        kind,
        values: rings
            .iter()
            .map(|ring| ring.iter().flat_map(f).collect())
            .collect(),
    };
    Ok(RingJets {
        value: pack(SampleKind::Scalar, &|j| vec![j.value]),
        gradient: pack(SampleKind::Gradient, &|j| vec![j.grad.x1, j.grad.x2]),
        hessian: pack(SampleKind::Hessian, &|j| vec![j.hess.m11, j.hess.m12, j.hess.m22]),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::Sym2;
    use crate::solutions::{ma_radial_exact, quadratic_solution};

    #[test]
    fn quadratic_hessian_samples() {
        let a = Sym2::new(2.0, 0.5, 1.0);
        let s = quadratic_solution(0.0, a, Vec2::ZERO, 3.0).unwrap();
        let rj = sample_rings(&s, &[2.0], 16).unwrap();
        let h = &rj.hessian.values[0];
        for j in 0..16 {
            assert_eq!([h[3 * j], h[3 * j + 1], h[3 * j + 2]], [2.0, 0.5, 1.0]);
        }
    }

    #[test]
    fn ma_ring_constant() {
        let s = ma_radial_exact(0.0, 1.0).unwrap();
        let rj = sample_rings(&s, &[10.0], 32).unwrap();
        let want = 10.0 * 101f64.sqrt() / 2.0 + 0.5 * 10f64.asinh();
        for v in &rj.value.values[0] {
            assert!((v - want).abs() < 1e-12 * want);
        }
    }

    #[test]
    fn inside_radius_rejected() {
        let s = ma_radial_exact(0.0, 1.0).unwrap();
        assert!(matches!(sample_rings(&s, &[0.5, 2.0], 16), Err(Error::DomainViolation(_))));
        assert!(sample_rings(&s, &[2.0], 7).is_err());
    }
}
