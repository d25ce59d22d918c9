use serde::{Deserialize, Serialize};

use super::ode::radial_ode_solve;
use super::radial::{ma_impl, radial_exact_impl, remark_impl};
use super::transform::{linear_pullback_impl, perturb, transform_impl, AffineFrame};
use super::{quadratic_impl, ExteriorSolution};
use crate::error::Result;
use crate::legendre;
use crate::operators::{EquationSpec, GeneralCoeffs, Mat2, Sym2, TauParams, Vec2};

/// Normalization of the isotropic Monge–Ampère radial family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RemarkNormalization {
    /// Prefactor `e^{C0}` with `A = e^{C0}I`; gives `det D²u → e^{4C0}`.
    Printed,
    /// `U' = sqrt(e^{2C0}r² + c1)`; gives `det D²u = e^{2C0}`.
    DetConsistent,
}

/// Family name plus parameters; [`build`] reconstructs the solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum SolutionDescriptor {
    Quadratic {
        tau: f64,
        a: Sym2,
        #[serde(default)]
        beta: Vec2,
        #[serde(default)]
        gamma: f64,
    },
    MaRadialExact {
        c0: f64,
        c1: f64,
    },
    RemarkFamily {
        variant: RemarkNormalization,
        c0: f64,
        c1: f64,
    },
    RadialExact {
        equation: EquationSpec,
        k: f64,
        r_min: f64,
    },
    RadialOde {
        tau: f64,
        c0: f64,
        r0: f64,
        p0: f64,
        r_max: f64,
    },
    Transform {
        base: Box<SolutionDescriptor>,
        frame: AffineFrame,
    },
    LinearPullback {
        base: Box<SolutionDescriptor>,
        l: Mat2,
    },
    Perturbed {
        base: Box<SolutionDescriptor>,
        eps: f64,
    },
    LegendreDual {
        base: Box<SolutionDescriptor>,
        tau: f64,
    },
    RotatedLargeTau {
        base: Box<SolutionDescriptor>,
        tau: f64,
    },
    ThreeTermDual {
        base: Box<SolutionDescriptor>,
        coeffs: GeneralCoeffs,
    },
}

impl SolutionDescriptor {
    pub fn family(&self) -> &'static str {
        match self {
            SolutionDescriptor::Quadratic { .. } => "quadratic",
            SolutionDescriptor::MaRadialExact { .. } => "ma_radial_exact",
            SolutionDescriptor::RemarkFamily { .. } => "remark_family",
            SolutionDescriptor::RadialExact { .. } => "radial_exact",
            SolutionDescriptor::RadialOde { .. } => "radial_ode",
            SolutionDescriptor::Transform { .. } => "transform",
            SolutionDescriptor::LinearPullback { .. } => "linear_pullback",
            SolutionDescriptor::Perturbed { .. } => "perturbed",
            SolutionDescriptor::LegendreDual { .. } => "legendre_dual",
            SolutionDescriptor::RotatedLargeTau { .. } => "rotated_large_tau",
            SolutionDescriptor::ThreeTermDual { .. } => "three_term_dual",
        }
    }
}

/// Builds the solution a descriptor names. Deterministic: the same
/// descriptor always yields bit-identical evaluations.
pub fn build(d: &SolutionDescriptor) -> Result<ExteriorSolution> {
    use SolutionDescriptor as D;
    match d {
        D::Quadratic { tau, a, beta, gamma } => quadratic_impl(*tau, *a, *beta, *gamma),
        D::MaRadialExact { c0, c1 } => ma_impl(*c0, *c1, d.clone()),
        D::RemarkFamily { variant, c0, c1 } => remark_impl(*variant, *c0, *c1, d.clone()),
        D::RadialExact { equation, k, r_min } => {
            radial_exact_impl(equation.build()?, *k, *r_min, d.clone())
        }
        D::RadialOde { tau, c0, r0, p0, r_max } => {
            radial_ode_solve(TauParams::new(*tau)?, *c0, *r0, *p0, *r_max)?
                .into_solution_with(d.clone())
        }
        D::Transform { base, frame } => transform_impl(&build(base)?, *frame, d.clone()),
        D::LinearPullback { base, l } => linear_pullback_impl(&build(base)?, *l, d.clone()),
        D::Perturbed { base, eps } => Ok(perturb(&build(base)?, *eps)),
        D::LegendreDual { .. } | D::RotatedLargeTau { .. } | D::ThreeTermDual { .. } => {
            Ok(legendre::pair_from_descriptor(d)?.dual)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip_bit_identical() {
        let d = SolutionDescriptor::Transform {
            base: Box::new(SolutionDescriptor::RadialOde {
                tau: 1.1780972450961724,
                c0: 0.5,
                r0: 1.0,
                p0: 1.2,
                r_max: 100.0,
            }),
            frame: AffineFrame {
                rotation_angle: 0.3,
                x0: Vec2::new(1.0, -0.5),
                beta_add: Vec2::new(0.1, 0.2),
                gamma_add: -1.0,
            },
        };
        let s1 = build(&d).unwrap();
        let json = s1.to_json();
        let s2 = ExteriorSolution::from_json(&json).unwrap();
        assert_eq!(s2.descriptor, d);
        let x = Vec2::new(7.3, 2.1);
        assert_eq!(s1.jet(x).unwrap(), s2.jet(x).unwrap());
    }

    #[test]
    fn unknown_fields_rejected() {
        let r: std::result::Result<SolutionDescriptor, _> =
            serde_json::from_str(r#"{"family":"ma_radial_exact","c0":0,"c1":1,"oops":2}"#);
        assert!(r.is_err());
    }
}
