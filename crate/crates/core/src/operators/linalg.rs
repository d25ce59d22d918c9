//! Fixed-size 2×2 linear algebra: points, symmetric matrices and general
//! matrices, with closed-form symmetric eigendecomposition.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

/// A point or vector in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x1: f64,
    pub x2: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x1: 0.0, x2: 0.0 };

    pub const fn new(x1: f64, x2: f64) -> Self {
        Vec2 { x1, x2 }
    }

    pub fn polar(r: f64, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Vec2::new(r * c, r * s)
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x1 * other.x1 + self.x2 * other.x2
    }

    pub fn norm(self) -> f64 {
        self.x1.hypot(self.x2)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn scale(self, s: f64) -> Vec2 {
        Vec2::new(s * self.x1, s * self.x2)
    }

    pub fn is_finite(self) -> bool {
        self.x1.is_finite() && self.x2.is_finite()
    }

    pub fn max_abs(self) -> f64 {
        self.x1.abs().max(self.x2.abs())
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x1 + o.x1, self.x2 + o.x2)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x1 - o.x1, self.x2 - o.x2)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x1, -self.x2)
    }
}

/// Real symmetric 2×2 matrix stored by its three independent entries.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Sym2 {
    pub m11: f64,
    pub m12: f64,
    pub m22: f64,
}

/// Eigen-decomposition of a [`Sym2`]. `angle` is the direction of the
/// eigenvector belonging to `lambda2` (the larger eigenvalue), in (-π/2, π/2].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymEigen {
    pub lambda1: f64,
    pub lambda2: f64,
    pub angle: f64,
}

impl SymEigen {
    /// Rotation whose first column is the `lambda2` eigenvector and whose
    /// second column is the `lambda1` eigenvector.
    pub fn frame(&self) -> Mat2 {
        Mat2::rotation(self.angle)
    }

    pub fn reconstruct(&self) -> Sym2 {
        let (s, c) = self.angle.sin_cos();
        // lambda2 along (c, s), lambda1 along (-s, c)
        Sym2::new(
            self.lambda2 * c * c + self.lambda1 * s * s,
            (self.lambda2 - self.lambda1) * c * s,
            self.lambda2 * s * s + self.lambda1 * c * c,
        )
    }

    /// Applies `f` to both eigenvalues and reassembles on the same eigenframe.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Sym2 {
        SymEigen {
            lambda1: f(self.lambda1),
            lambda2: f(self.lambda2),
            angle: self.angle,
        }
        .reconstruct()
    }
}

impl Sym2 {
    pub const ZERO: Sym2 = Sym2 {
        m11: 0.0,
        m12: 0.0,
        m22: 0.0,
    };
    pub const IDENTITY: Sym2 = Sym2 {
        m11: 1.0,
        m12: 0.0,
        m22: 1.0,
    };

    pub const fn new(m11: f64, m12: f64, m22: f64) -> Self {
        Sym2 { m11, m12, m22 }
    }

    pub const fn diag(d1: f64, d2: f64) -> Self {
        Sym2::new(d1, 0.0, d2)
    }

    pub fn scalar(s: f64) -> Self {
        Sym2::new(s, 0.0, s)
    }

    /// Symmetric outer product `v v^T`.
    pub fn outer(v: Vec2) -> Self {
        Sym2::new(v.x1 * v.x1, v.x1 * v.x2, v.x2 * v.x2)
    }

    pub fn trace(&self) -> f64 {
        self.m11 + self.m22
    }

    pub fn det(&self) -> f64 {
        self.m11 * self.m22 - self.m12 * self.m12
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.m11 * v.x1 + self.m12 * v.x2,
            self.m12 * v.x1 + self.m22 * v.x2,
        )
    }

    /// `v^T M v`.
    pub fn quad_form(&self, v: Vec2) -> f64 {
        self.m11 * v.x1 * v.x1 + 2.0 * self.m12 * v.x1 * v.x2 + self.m22 * v.x2 * v.x2
    }

    pub fn scale(&self, s: f64) -> Sym2 {
        Sym2::new(s * self.m11, s * self.m12, s * self.m22)
    }

    pub fn add_scalar(&self, s: f64) -> Sym2 {
        Sym2::new(self.m11 + s, self.m12, self.m22 + s)
    }

    pub fn to_mat(&self) -> Mat2 {
        Mat2::new(self.m11, self.m12, self.m12, self.m22)
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        (self.m11 * self.m11 + 2.0 * self.m12 * self.m12 + self.m22 * self.m22).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.m11.abs().max(self.m12.abs()).max(self.m22.abs())
    }

    pub fn is_finite(&self) -> bool {
        self.m11.is_finite() && self.m12.is_finite() && self.m22.is_finite()
    }

    /// Closed-form eigendecomposition. Eigenvalues come out ordered
    /// `lambda1 <= lambda2`; a multiple eigenvalue gets angle 0.
    pub fn eigen(&self) -> SymEigen {
        let mean = 0.5 * (self.m11 + self.m22);
        let half_diff = 0.5 * (self.m11 - self.m22);
        let radius = half_diff.hypot(self.m12);
        let angle = if self.m12 == 0.0 && half_diff == 0.0 {
            0.0
        } else {
            let a = 0.5 * (2.0 * self.m12).atan2(self.m11 - self.m22);
            // keep the angle in (-π/2, π/2]
            if a <= -std::f64::consts::FRAC_PI_2 {
                a + std::f64::consts::PI
            } else {
                a
            }
        };
        // Product form for the smaller-magnitude root avoids cancellation.
        let (lambda1, lambda2) = if mean >= 0.0 {
            let big = mean + radius;
            let small = if big != 0.0 { self.det() / big } else { mean - radius };
            (small, big)
        } else {
            let big = mean - radius;
            let small = if big != 0.0 { self.det() / big } else { mean + radius };
            (big, small)
        };
        SymEigen {
            lambda1: lambda1.min(lambda2),
            lambda2: lambda1.max(lambda2),
            angle,
        }
    }

    pub fn inverse(&self) -> Option<Sym2> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some(Sym2::new(self.m22 / det, -self.m12 / det, self.m11 / det))
    }

    /// Principal square root of a positive semidefinite matrix.
    pub fn sqrt_psd(&self) -> Option<Sym2> {
        let e = self.eigen();
        if e.lambda1 < 0.0 {
            return None;
        }
        Some(e.map(f64::sqrt))
    }

    /// Inverse principal square root of a positive definite matrix.
    pub fn inv_sqrt_pd(&self) -> Option<Sym2> {
        let e = self.eigen();
        if e.lambda1 <= 0.0 {
            return None;
        }
        Some(e.map(|l| 1.0 / l.sqrt()))
    }

    pub fn is_positive_definite(&self) -> bool {
        self.m11 > 0.0 && self.det() > 0.0
    }

    /// Symmetric product `M N M` (congruence of `N` by the symmetric `M`).
    pub fn sandwich(&self, inner: &Sym2) -> Sym2 {
        self.to_mat().congruence(inner)
    }

    /// Symmetrized matrix product `(MN + NM)/2`; exact product when `M`, `N` commute.
    pub fn sym_product(&self, other: &Sym2) -> Sym2 {
        let p = self.to_mat() * other.to_mat();
        Sym2::new(p.a11, 0.5 * (p.a12 + p.a21), p.a22)
    }

    pub fn max_abs_diff(&self, other: &Sym2) -> f64 {
        (*self - *other).max_abs()
    }
}

impl Add for Sym2 {
    type Output = Sym2;
    fn add(self, o: Sym2) -> Sym2 {
        Sym2::new(self.m11 + o.m11, self.m12 + o.m12, self.m22 + o.m22)
    }
}

impl Sub for Sym2 {
    type Output = Sym2;
    fn sub(self, o: Sym2) -> Sym2 {
        Sym2::new(self.m11 - o.m11, self.m12 - o.m12, self.m22 - o.m22)
    }
}

impl Neg for Sym2 {
    type Output = Sym2;
    fn neg(self) -> Sym2 {
        self.scale(-1.0)
    }
}

/// General real 2×2 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 {
        a11: 1.0,
        a12: 0.0,
        a21: 0.0,
        a22: 1.0,
    };

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Mat2 { a11, a12, a21, a22 }
    }

    /// Counter-clockwise rotation by `angle`.
    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Mat2::new(c, -s, s, c)
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.a11, self.a21, self.a12, self.a22)
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        Vec2::new(
            self.a11 * v.x1 + self.a12 * v.x2,
            self.a21 * v.x1 + self.a22 * v.x2,
        )
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let det = self.det();
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some(Mat2::new(
            self.a22 / det,
            -self.a12 / det,
            -self.a21 / det,
            self.a11 / det,
        ))
    }

    /// `self * S * self^T`, symmetrized.
    pub fn congruence(&self, s: &Sym2) -> Sym2 {
        let p = *self * s.to_mat() * self.transpose();
        Sym2::new(p.a11, 0.5 * (p.a12 + p.a21), p.a22)
    }

    /// `self^T * S * self`, symmetrized.
    pub fn congruence_t(&self, s: &Sym2) -> Sym2 {
        self.transpose().congruence(s)
    }

    /// Smallest singular value.
    pub fn min_singular_value(&self) -> f64 {
        let gram = self.transpose() * *self;
        let g = Sym2::new(gram.a11, 0.5 * (gram.a12 + gram.a21), gram.a22);
        g.eigen().lambda1.max(0.0).sqrt()
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, o: Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }
}

/// Eigenvalues and eigenvector angle of a symmetric matrix (λ1 ≤ λ2).
pub fn eigen_sym2(m: &Sym2) -> (f64, f64, f64) {
    let e = m.eigen();
    (e.lambda1, e.lambda2, e.angle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    #[test]
    fn diagonal_input() {
        let (l1, l2, angle) = eigen_sym2(&Sym2::diag(3.0, 1.0));
        assert_eq!((l1, l2), (1.0, 3.0));
        assert_eq!(angle, 0.0);
        let (l1, l2, angle) = eigen_sym2(&Sym2::diag(1.0, 3.0));
        assert_eq!((l1, l2), (1.0, 3.0));
        assert!((angle.abs() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn reflection_matrix() {
        let (l1, l2, angle) = eigen_sym2(&Sym2::new(0.0, 1.0, 0.0));
        assert!((l1 + 1.0).abs() < 1e-15 && (l2 - 1.0).abs() < 1e-15);
        assert!((angle - FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn hand_computed_characteristic_polynomial() {
        // λ² - 4λ + 3 = 0
        let (l1, l2, angle) = eigen_sym2(&Sym2::new(2.0, 1.0, 2.0));
        assert!((l1 - 1.0).abs() < 1e-15 && (l2 - 3.0).abs() < 1e-15);
        assert!((angle - FRAC_PI_4).abs() < 1e-15);
    }

    #[test]
    fn repeated_eigenvalue_has_zero_angle() {
        assert_eq!(Sym2::scalar(2.5).eigen().angle, 0.0);
    }

    #[test]
    fn frame_diagonalizes() {
        let m = Sym2::new(1.3, -0.7, -2.1);
        let e = m.eigen();
        let d = e.frame().transpose().congruence(&m);
        assert!(d.m12.abs() < 1e-15);
        assert!((d.m11 - e.lambda2).abs() < 1e-14);
        assert!((d.m22 - e.lambda1).abs() < 1e-14);
    }

    #[test]
    fn sqrt_and_inverse() {
        let m = Sym2::new(2.0, 0.5, 1.0);
        let r = m.sqrt_psd().unwrap();
        assert!(r.sym_product(&r).max_abs_diff(&m) < 1e-14);
        let ri = m.inv_sqrt_pd().unwrap();
        let id = ri.sandwich(&m);
        assert!(id.max_abs_diff(&Sym2::IDENTITY) < 1e-14);
        let inv = m.inverse().unwrap();
        assert!(inv.sym_product(&m).max_abs_diff(&Sym2::IDENTITY) < 1e-14);
    }
}
