//! Fixed-size complex linear algebra on `C^2`.
//!
//! Everything in the walk acts on two-component spinors, so a small `Copy`
//! matrix type is used instead of a general dense-matrix library.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// A two-component complex vector, the value of a lattice state at one site.
pub type Spinor = [C64; 2];

pub const ZERO_SPINOR: Spinor = [C64::new(0.0, 0.0), C64::new(0.0, 0.0)];

/// A 2×2 complex matrix stored row-major.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const fn new(m00: C64, m01: C64, m10: C64, m11: C64) -> Self {
        Mat2([[m00, m01], [m10, m11]])
    }

    pub fn identity() -> Self {
        Self::diag(C64::new(1.0, 0.0), C64::new(1.0, 0.0))
    }

    pub fn zero() -> Self {
        Mat2([[C64::new(0.0, 0.0); 2]; 2])
    }

    pub fn diag(d0: C64, d1: C64) -> Self {
        let z = C64::new(0.0, 0.0);
        Self::new(d0, z, z, d1)
    }

    /// Real matrix from row-major entries.
    pub fn real(m00: f64, m01: f64, m10: f64, m11: f64) -> Self {
        Self::new(m00.into(), m01.into(), m10.into(), m11.into())
    }

    /// Outer product `u v*`.
    pub fn outer(u: &Spinor, v: &Spinor) -> Self {
        Self::new(
            u[0] * v[0].conj(),
            u[0] * v[1].conj(),
            u[1] * v[0].conj(),
            u[1] * v[1].conj(),
        )
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.0[r][c]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Self::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn det(&self) -> C64 {
        let m = &self.0;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn scale(&self, s: C64) -> Self {
        let m = &self.0;
        Self::new(s * m[0][0], s * m[0][1], s * m[1][0], s * m[1][1])
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d.norm() == 0.0 {
            return None;
        }
        let m = &self.0;
        Some(Self::new(m[1][1], -m[0][1], -m[1][0], m[0][0]).scale(d.inv()))
    }

    #[inline]
    pub fn apply(&self, v: &Spinor) -> Spinor {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1],
            m[1][0] * v[0] + m[1][1] * v[1],
        ]
    }

    /// `self* v` without forming the adjoint.
    #[inline]
    pub fn apply_adjoint(&self, v: &Spinor) -> Spinor {
        let m = &self.0;
        [
            m[0][0].conj() * v[0] + m[1][0].conj() * v[1],
            m[0][1].conj() * v[0] + m[1][1].conj() * v[1],
        ]
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (*self - *other).max_abs()
    }

    /// Spectral (operator) norm.
    pub fn op_norm(&self) -> f64 {
        // Largest eigenvalue of the Hermitian matrix M*M.
        let h = self.adjoint() * *self;
        let p = h.0[0][0].re;
        let q = h.0[1][1].re;
        let off = h.0[0][1].norm();
        let mean = 0.5 * (p + q);
        let rad = (0.25 * (p - q) * (p - q) + off * off).sqrt();
        (mean + rad).max(0.0).sqrt()
    }

    /// `‖M*M − I‖_max`.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self).max_abs_diff(&Self::identity())
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    /// Unitary factor of the polar decomposition, i.e. the closest unitary
    /// matrix in operator norm. Returns `None` for singular input.
    pub fn polar_unitary(&self) -> Option<Self> {
        // Newton iteration X <- (X + X^{-*}) / 2, quadratically convergent.
        let mut x = *self;
        for _ in 0..100 {
            let inv_adj = x.inverse()?.adjoint();
            let next = (x + inv_adj).scale(C64::new(0.5, 0.0));
            let delta = next.max_abs_diff(&x);
            x = next;
            if delta < 1e-15 {
                break;
            }
        }
        Some(x)
    }

    /// Integer power by repeated squaring; negative exponents use the adjoint
    /// and therefore assume the matrix is unitary.
    pub fn powi_unitary(&self, n: i64) -> Self {
        let mut base = if n < 0 { self.adjoint() } else { *self };
        let mut e = n.unsigned_abs();
        let mut acc = Self::identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base * base;
            e >>= 1;
        }
        acc
    }
}

impl Mul for Mat2 {
    type Output = Mat2;

    fn mul(self, rhs: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;

    fn add(self, rhs: Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2::new(
            a[0][0] + b[0][0],
            a[0][1] + b[0][1],
            a[1][0] + b[1][0],
            a[1][1] + b[1][1],
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;

    fn sub(self, rhs: Mat2) -> Mat2 {
        self + rhs.scale(C64::new(-1.0, 0.0))
    }
}

impl fmt::Debug for Mat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.0;
        write!(
            f,
            "[[{}, {}], [{}, {}]]",
            m[0][0], m[0][1], m[1][0], m[1][1]
        )
    }
}

#[inline]
pub fn spinor_norm_sqr(v: &Spinor) -> f64 {
    v[0].norm_sqr() + v[1].norm_sqr()
}

/// `⟨u, v⟩`, antilinear in the first argument.
#[inline]
pub fn spinor_inner(u: &Spinor, v: &Spinor) -> C64 {
    u[0].conj() * v[0] + u[1].conj() * v[1]
}

#[inline]
pub fn spinor_scale(v: &Spinor, s: C64) -> Spinor {
    [v[0] * s, v[1] * s]
}

/// Wrap an angle into `(−π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    use std::f64::consts::PI;
    let mut t = theta % (2.0 * PI);
    if t <= -PI {
        t += 2.0 * PI;
    } else if t > PI {
        t -= 2.0 * PI;
    }
    t
}

/// Reduce an angle into `[0, 2π)`.
pub fn wrap_positive(theta: f64) -> f64 {
    use std::f64::consts::PI;
    let t = theta.rem_euclid(2.0 * PI);
    if t >= 2.0 * PI {
        0.0
    } else {
        t
    }
}
