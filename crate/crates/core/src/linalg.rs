//! Minimal 2×2 complex linear algebra.
//!
//! Everything in this crate acts on a single qubit (the coin), so a fixed-size
//! matrix type is all that is needed. Entries are stored row-major.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Shorthand for a real complex number.
#[inline]
pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `e^{iφ}`.
#[inline]
pub fn cis(phi: f64) -> Complex64 {
    Complex64::from_polar(1.0, phi)
}

/// A coin 2-vector `(R, L)`, equivalently `(H, V)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vec2(pub [Complex64; 2]);

impl Vec2 {
    pub const H: Vec2 = Vec2([ONE, ZERO]);
    pub const V: Vec2 = Vec2([ZERO, ONE]);

    pub fn new(r: Complex64, l: Complex64) -> Self {
        Vec2([r, l])
    }

    pub fn real(r: f64, l: f64) -> Self {
        Vec2([c(r), c(l)])
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0[0].norm_sqr() + self.0[1].norm_sqr()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        Vec2([self.0[0] / n, self.0[1] / n])
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Vec2) -> Complex64 {
        self.0[0].conj() * other.0[0] + self.0[1].conj() * other.0[1]
    }

    /// The orthogonal state `(-conj(b), conj(a))`.
    pub fn orthogonal(&self) -> Vec2 {
        Vec2([-self.0[1].conj(), self.0[0].conj()])
    }

    pub fn conj(&self) -> Vec2 {
        Vec2([self.0[0].conj(), self.0[1].conj()])
    }

    pub fn scale(&self, s: Complex64) -> Vec2 {
        Vec2([self.0[0] * s, self.0[1] * s])
    }

    /// `|self⟩⟨self|`.
    pub fn projector(&self) -> Mat2 {
        Mat2::outer(self, self)
    }

    /// Largest entrywise modulus of `self - e^{iφ} other` minimised over the
    /// global phase `φ`.
    pub fn phase_distance(&self, other: &Vec2) -> f64 {
        let overlap = other.inner(self);
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            ONE
        };
        (0..2)
            .map(|k| (self.0[k] - other.0[k] * phase).norm())
            .fold(0.0, f64::max)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2([self.0[0] + rhs.0[0], self.0[1] + rhs.0[1]])
    }
}

/// Row-major 2×2 complex matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);
    pub const ZERO: Mat2 = Mat2([[ZERO, ZERO], [ZERO, ZERO]]);
    pub const NOT: Mat2 = Mat2([[ZERO, ONE], [ONE, ZERO]]);

    pub fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Mat2([[a, b], [c, d]])
    }

    pub fn real(a: f64, b: f64, c_: f64, d: f64) -> Self {
        Mat2([[c(a), c(b)], [c(c_), c(d)]])
    }

    pub fn from_rows(r0: Vec2, r1: Vec2) -> Self {
        Mat2([r0.0, r1.0])
    }

    pub fn from_cols(c0: Vec2, c1: Vec2) -> Self {
        Mat2([[c0.0[0], c1.0[0]], [c0.0[1], c1.0[1]]])
    }

    /// `|a⟩⟨b|`.
    pub fn outer(a: &Vec2, b: &Vec2) -> Self {
        let mut m = Mat2::ZERO;
        for i in 0..2 {
            for j in 0..2 {
                m.0[i][j] = a.0[i] * b.0[j].conj();
            }
        }
        m
    }

    pub fn row(&self, i: usize) -> Vec2 {
        Vec2(self.0[i])
    }

    pub fn col(&self, j: usize) -> Vec2 {
        Vec2([self.0[0][j], self.0[1][j]])
    }

    pub fn adjoint(&self) -> Mat2 {
        let m = &self.0;
        Mat2([
            [m[0][0].conj(), m[1][0].conj()],
            [m[0][1].conj(), m[1][1].conj()],
        ])
    }

    pub fn conj(&self) -> Mat2 {
        let m = &self.0;
        Mat2([
            [m[0][0].conj(), m[0][1].conj()],
            [m[1][0].conj(), m[1][1].conj()],
        ])
    }

    pub fn scale(&self, s: Complex64) -> Mat2 {
        let m = &self.0;
        Mat2([[m[0][0] * s, m[0][1] * s], [m[1][0] * s, m[1][1] * s]])
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> Complex64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn inverse(&self) -> Option<Mat2> {
        let d = self.det();
        if d.norm() == 0.0 {
            return None;
        }
        let m = &self.0;
        Some(Mat2([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]))
    }

    pub fn apply(&self, v: &Vec2) -> Vec2 {
        let m = &self.0;
        Vec2([
            m[0][0] * v.0[0] + m[0][1] * v.0[1],
            m[1][0] * v.0[0] + m[1][1] * v.0[1],
        ])
    }

    /// Row vector times matrix: `v M`.
    pub fn left_apply(&self, v: &Vec2) -> Vec2 {
        let m = &self.0;
        Vec2([
            v.0[0] * m[0][0] + v.0[1] * m[1][0],
            v.0[0] * m[0][1] + v.0[1] * m[1][1],
        ])
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn distance(&self, other: &Mat2) -> f64 {
        (*self - *other).max_abs()
    }

    /// Entrywise distance after removing the best global phase between the two
    /// matrices.
    pub fn phase_distance(&self, other: &Mat2) -> f64 {
        let overlap = (other.adjoint() * *self).trace();
        let phase = if overlap.norm() > 1e-300 {
            overlap / overlap.norm()
        } else {
            ONE
        };
        self.distance(&other.scale(phase))
    }

    /// `‖U†U − I‖` as a largest entrywise modulus.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self).distance(&Mat2::IDENTITY)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        self.distance(&self.adjoint())
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.0.iter().flatten().all(|z| z.im.abs() <= tol)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> [f64; 2] {
        let a = self.0[0][0].re;
        let d = self.0[1][1].re;
        let b = 0.5 * (self.0[0][1] + self.0[1][0].conj());
        let mean = 0.5 * (a + d);
        let half_gap = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [mean - half_gap, mean + half_gap]
    }

    /// Operator (spectral) norm of a Hermitian matrix.
    pub fn hermitian_norm(&self) -> f64 {
        let [lo, hi] = self.hermitian_eigenvalues();
        lo.abs().max(hi.abs())
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        let mut out = Mat2::ZERO;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        out
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let mut out = self;
        for i in 0..2 {
            for j in 0..2 {
                out.0[i][j] += rhs.0[i][j];
            }
        }
        out
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        self + (-rhs)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(c(-1.0))
    }
}

impl std::iter::Sum for Mat2 {
    fn sum<It: Iterator<Item = Mat2>>(iter: It) -> Mat2 {
        iter.fold(Mat2::ZERO, |acc, m| acc + m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_product() {
        let a = Mat2::new(c(1.0), I, c(2.0), c(-1.0));
        let inv = a.inverse().unwrap();
        assert!((a * inv).distance(&Mat2::IDENTITY) < 1e-15);
        assert!(Mat2::ZERO.inverse().is_none());
    }

    #[test]
    fn hermitian_eigenvalues_of_projector() {
        let p = Vec2::real(0.6, 0.8).projector();
        let [lo, hi] = p.hermitian_eigenvalues();
        assert!(lo.abs() < 1e-15);
        assert!((hi - 1.0).abs() < 1e-15);
    }

    #[test]
    fn phase_distance_ignores_global_phase() {
        let u = Mat2::real(1.0, 1.0, 1.0, -1.0).scale(c(0.5f64.sqrt()));
        assert!(u.phase_distance(&u.scale(cis(1.234))) < 1e-15);
        assert!(u.phase_distance(&Mat2::IDENTITY) > 0.1);
    }

    #[test]
    fn orthogonal_state_is_orthogonal() {
        let v = Vec2::new(c(0.6), cis(0.3).scale(0.8));
        assert!(v.inner(&v.orthogonal()).norm() < 1e-16);
    }
}
