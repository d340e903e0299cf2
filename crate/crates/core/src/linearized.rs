//! Linear dynamics around a steady state: propagator, cumulative infection
//! and convergence rate.

use crate::error::{Error, Result};
use crate::linalg::{dot, Mat2};
use crate::model::jacobian_at;
use crate::params::ModelParams;
use crate::steady_state::SteadyState;
use crate::Scalar;

/// Jacobian at a steady state with its spectral data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizedSystem<S> {
    pub jacobian: Mat2<S>,
    /// `(lambda_1, lambda_2)` ascending; `lambda_2` is the slowest mode.
    pub eigenvalues: (S, S),
    /// Right eigenvector of `lambda_2`.
    pub slow_right: [S; 2],
    /// Left eigenvector of `lambda_2`.
    pub slow_left: [S; 2],
}

fn longer<S: Scalar>(u: [S; 2], w: [S; 2]) -> [S; 2] {
    if u[0].abs() + u[1].abs() >= w[0].abs() + w[1].abs() {
        u
    } else {
        w
    }
}

impl<S: Scalar> LinearizedSystem<S> {
    pub fn at(p: &ModelParams<S>, ss: &SteadyState<S>) -> Result<Self> {
        Self::from_jacobian(jacobian_at(p, &ss.state))
    }

    pub fn from_jacobian(j: Mat2<S>) -> Result<Self> {
        let (l1, l2) = j.real_eigenvalues().ok_or(Error::Precondition(
            "jacobian has complex spectrum".into(),
        ))?;
        let slow_right = longer([j.b, l2 - j.a], [l2 - j.d, j.c]);
        let slow_left = longer([j.c, l2 - j.a], [l2 - j.d, j.b]);
        Ok(Self {
            jacobian: j,
            eigenvalues: (l1, l2),
            slow_right,
            slow_left,
        })
    }

    /// `exp(t J)` in hyperbolic form.
    pub fn propagator(&self, t: S) -> Mat2<S> {
        let j = &self.jacobian;
        let half = S::lit(0.5);
        let tau = j.trace();
        let delta = j.discriminant().max(S::zero()).sqrt();
        let z = t * delta * half;
        let (c, s) = if z > S::lit(30.0) {
            let (e1, e2) = ((t * self.eigenvalues.0).exp(), (t * self.eigenvalues.1).exp());
            (half * (e1 + e2), (e2 - e1) / delta)
        } else {
            let g = (t * tau * half).exp();
            let sinhc = if z.abs() < S::lit(1e-4) {
                S::one() + z * z / S::lit(6.0)
            } else {
                z.sinh() / z
            };
            (g * z.cosh(), g * t * sinhc)
        };
        let shifted = j.sub(&Mat2::identity().scale(tau * half));
        Mat2::identity().scale(c).add(&shifted.scale(s))
    }

    /// Deviation `exp(t J) d0` of the linearized system.
    pub fn linear_trajectory(&self, d0: [S; 2], t: S) -> [S; 2] {
        self.propagator(t).mul_vec(d0)
    }

    /// Speed of convergence: modulus of the eigenvalue closest to zero.
    pub fn convergence_rate(&self) -> S {
        self.eigenvalues.1.abs()
    }

    /// Convergence rate of the discounted system `J - r I`.
    pub fn discounted_convergence_rate(&self, r: S) -> S {
        (self.eigenvalues.1 - r).abs()
    }

    /// First-order change of `lambda_2` under a Jacobian perturbation `dj`.
    pub fn eigenvalue_sensitivity(&self, dj: &Mat2<S>) -> S {
        let v = self.slow_left;
        let u = self.slow_right;
        let w = dj.mul_vec(u);
        dot(v, w) / dot(v, u)
    }

    /// Discounted cumulative deviation `(I - J / r)^{-1} d0`.
    pub fn cumulative_infection(
        &self,
        p: &ModelParams<S>,
        d0: [S; 2],
    ) -> Result<CumulativeInfection<S>> {
        let r = p.r();
        if r <= self.eigenvalues.1 {
            return Err(Error::Precondition(format!(
                "discount rate {} does not exceed the leading eigenvalue {}",
                r, self.eigenvalues.1
            )));
        }
        let m = Mat2::identity().sub(&self.jacobian.scale(r.recip()));
        let [ci_a, ci_v] = m.solve(d0).ok_or(Error::Singular {
            what: "cumulative infection resolvent",
        })?;
        Ok(CumulativeInfection {
            ci_a,
            ci_v,
            total: p.q() * ci_a + (S::one() - p.q()) * ci_v,
        })
    }
}

/// Group and population cumulative infection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CumulativeInfection<S> {
    pub ci_a: S,
    pub ci_v: S,
    pub total: S,
}

impl<S: Scalar> CumulativeInfection<S> {
    pub fn vector(&self) -> [S; 2] {
        [self.ci_a, self.ci_v]
    }

    /// Discounted population infection `rho_ss + CI * scale` for a shock of
    /// size `scale` along the direction used to build `self`.
    pub fn affine_total(&self, rho_ss: S, scale: S) -> S {
        rho_ss + self.total * scale
    }
}

/// Partial sums of `sum_t (J / r)^t d0`, stopping once the increment drops
/// below `tol`. `None` if the series has not settled after `max_terms`.
pub fn bonacich_series<S: Scalar>(
    j: &Mat2<S>,
    r: S,
    d0: [S; 2],
    tol: S,
    max_terms: usize,
) -> Option<[S; 2]> {
    let m = j.scale(r.recip());
    let mut term = d0;
    let mut sum = d0;
    for _ in 0..max_terms {
        term = m.mul_vec(term);
        sum = [sum[0] + term[0], sum[1] + term[1]];
        if term[0].abs().max(term[1].abs()) <= tol {
            return Some(sum);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::steady_state::solve_steady_state;

    fn system() -> (ModelParams<f64>, LinearizedSystem<f64>) {
        let p = ModelParams::new(0.35, 0.6, 0.25, 0.1, 0.45, 0.3).unwrap();
        let ss = solve_steady_state(&p).unwrap();
        (p, LinearizedSystem::at(&p, &ss).unwrap())
    }

    #[test]
    fn eigenvectors_are_eigenvectors() {
        let (_, s) = system();
        let l = s.eigenvalues.1;
        let ju = s.jacobian.mul_vec(s.slow_right);
        let vj = s.jacobian.transpose().mul_vec(s.slow_left);
        for i in 0..2 {
            assert!((ju[i] - l * s.slow_right[i]).abs() < 1e-13);
            assert!((vj[i] - l * s.slow_left[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn propagator_semigroup() {
        let (_, s) = system();
        let a = s.propagator(0.7).mul(&s.propagator(1.9));
        let b = s.propagator(2.6);
        assert!(a.sub(&b).max_abs() < 1e-14);
        assert!(s.propagator(0.0).sub(&Mat2::identity()).max_abs() < 1e-15);
    }

    #[test]
    fn propagator_large_time_branch_is_continuous() {
        let (_, s) = system();
        let delta = s.jacobian.discriminant().sqrt();
        let t = 60.0 / delta;
        let below = s.propagator(t * (1.0 - 1e-9));
        let above = s.propagator(t * (1.0 + 1e-9));
        assert!(below.sub(&above).max_abs() < 1e-6 * below.max_abs());
    }

    #[test]
    fn series_matches_resolvent_when_convergent() {
        let (p, s) = system();
        let p = p.with_r(2.0).unwrap();
        let ci = s.cumulative_infection(&p, [1.0, 1.0]).unwrap();
        let sum = bonacich_series(&s.jacobian, 2.0, [1.0, 1.0], 1e-16, 10_000).unwrap();
        assert!((sum[0] - ci.ci_a).abs() < 1e-12);
        assert!((sum[1] - ci.ci_v).abs() < 1e-12);
    }
}
