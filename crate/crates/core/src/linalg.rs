//! Closed-form 2x2 linear algebra.

use crate::Scalar;

/// Row-major 2x2 matrix `[[a, b], [c, d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat2<S> {
    pub a: S,
    pub b: S,
    pub c: S,
    pub d: S,
}

impl<S: Scalar> Mat2<S> {
    pub fn new(a: S, b: S, c: S, d: S) -> Self {
        Self { a, b, c, d }
    }

    pub fn identity() -> Self {
        Self::diag(S::one(), S::one())
    }

    pub fn diag(a: S, d: S) -> Self {
        Self::new(a, S::zero(), S::zero(), d)
    }

    pub fn trace(&self) -> S {
        self.a + self.d
    }

    pub fn det(&self) -> S {
        self.a * self.d - self.b * self.c
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.a, self.c, self.b, self.d)
    }

    pub fn scale(&self, s: S) -> Self {
        Self::new(self.a * s, self.b * s, self.c * s, self.d * s)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::new(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::new(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )
    }

    pub fn mul_vec(&self, v: [S; 2]) -> [S; 2] {
        [self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1]]
    }

    /// Inverse, or `None` when `|det|` is not above `tiny` times the scale.
    pub fn inverse(&self) -> Option<Self> {
        let det = self.det();
        let scale = self
            .a
            .abs()
            .max(self.b.abs())
            .max(self.c.abs())
            .max(self.d.abs());
        if !det.is_finite() || det.abs() <= S::epsilon() * scale * scale {
            return None;
        }
        Some(Self::new(self.d, -self.b, -self.c, self.a).scale(det.recip()))
    }

    pub fn solve(&self, rhs: [S; 2]) -> Option<[S; 2]> {
        self.inverse().map(|m| m.mul_vec(rhs))
    }

    /// `(A - D)^2 + 4 B C`.
    pub fn discriminant(&self) -> S {
        let diff = self.a - self.d;
        diff * diff + S::lit(4.0) * self.b * self.c
    }

    /// Real eigenvalues `(lambda_1, lambda_2)` with `lambda_1 <= lambda_2`,
    /// or `None` when the spectrum is complex.
    pub fn real_eigenvalues(&self) -> Option<(S, S)> {
        let disc = self.discriminant();
        if disc < S::zero() {
            return None;
        }
        let root = disc.sqrt();
        let half = S::lit(0.5);
        let tr = self.trace();
        Some((half * (tr - root), half * (tr + root)))
    }

    pub fn max_abs(&self) -> S {
        self.a
            .abs()
            .max(self.b.abs())
            .max(self.c.abs())
            .max(self.d.abs())
    }
}

pub fn dot<S: Scalar>(u: [S; 2], v: [S; 2]) -> S {
    u[0] * v[0] + u[1] * v[1]
}

pub fn norm2<S: Scalar>(v: [S; 2]) -> S {
    v[0].hypot(v[1])
}
