//! Closed-form 2×2 operator norms.

use num_complex::Complex;

use crate::scalar::Real;

/// Real 2×2 matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Real> Mat2<T> {
    pub fn new(a: T, b: T, c: T, d: T) -> Self {
        Self { a, b, c, d }
    }

    pub fn det(&self) -> T {
        self.a * self.d - self.b * self.c
    }

    /// Both singular values `(σ_max, σ_min)`.
    ///
    /// Uses the rotation/reflection split `M = ½[(a+d, b−c), (c−b, a+d)] + ½[(a−d, b+c), (b+c, d−a)]`,
    /// which gives `σ = (|p| ± |q|)/2` without forming `MᵀM`.
    pub fn singular_values(&self) -> (T, T) {
        let p = (self.a + self.d).hypot(self.c - self.b);
        let q = (self.a - self.d).hypot(self.b + self.c);
        let two = T::lit(2.0);
        ((p + q) / two, (p - q).abs() / two)
    }

    /// Spectral (ℓ² operator) norm.
    pub fn op_norm(&self) -> T {
        self.singular_values().0
    }

    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        if det == T::zero() {
            return None;
        }
        Some(Self::new(self.d / det, -self.b / det, -self.c / det, self.a / det))
    }
}

/// Spectral norm of a complex 2×2 matrix given by its columns.
pub fn complex_op_norm<T: Real>(col0: [Complex<T>; 2], col1: [Complex<T>; 2]) -> T {
    let n00 = col0[0].norm_sqr() + col0[1].norm_sqr();
    let n11 = col1[0].norm_sqr() + col1[1].norm_sqr();
    let n01 = col0[0].conj() * col1[0] + col0[1].conj() * col1[1];
    // Eigenvalues of the Hermitian Gram matrix [[n00, n01], [n01*, n11]].
    let half = T::lit(0.5);
    let mean = (n00 + n11) * half;
    let spread = ((n00 - n11) * half).hypot(n01.norm());
    (mean + spread).sqrt()
}
