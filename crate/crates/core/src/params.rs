//! Model parameters and the two-group infection state.

use crate::error::{Error, Result};
use crate::Scalar;

/// Primitive parameters of the two-group model.
///
/// Group `a` (anti-vaxxers) has mass `q`, group `v` (vaxxers) mass `1 - q`.
/// `h` is the homophily weight, `mu` the recovery rate, `x_a`/`x_v` the
/// vaccinated fractions and `r` the discount rate used by cumulative
/// infection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<S> {
    q: S,
    h: S,
    mu: S,
    x_a: S,
    x_v: S,
    r: S,
}

fn check<S: Scalar>(name: &'static str, v: S, ok: bool, expected: &'static str) -> Result<()> {
    if ok && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value: v.as_f64(),
            expected,
        })
    }
}

impl<S: Scalar> ModelParams<S> {
    pub fn new(q: S, h: S, mu: S, x_a: S, x_v: S, r: S) -> Result<Self> {
        let (zero, one) = (S::zero(), S::one());
        check("q", q, q > zero && q < one, "0 < q < 1")?;
        check("h", h, h >= zero && h <= one, "0 <= h <= 1")?;
        check("mu", mu, mu > zero, "mu > 0")?;
        check("x_a", x_a, x_a >= zero && x_a <= one, "0 <= x_a <= 1")?;
        check("x_v", x_v, x_v >= zero && x_v <= one, "0 <= x_v <= 1")?;
        check("r", r, r > zero, "r > 0")?;
        Ok(Self {
            q,
            h,
            mu,
            x_a,
            x_v,
            r,
        })
    }

    #[inline]
    pub fn q(&self) -> S {
        self.q
    }
    #[inline]
    pub fn h(&self) -> S {
        self.h
    }
    #[inline]
    pub fn mu(&self) -> S {
        self.mu
    }
    #[inline]
    pub fn x_a(&self) -> S {
        self.x_a
    }
    #[inline]
    pub fn x_v(&self) -> S {
        self.x_v
    }
    #[inline]
    pub fn r(&self) -> S {
        self.r
    }

    pub fn with_h(&self, h: S) -> Result<Self> {
        Self::new(self.q, h, self.mu, self.x_a, self.x_v, self.r)
    }

    pub fn with_mu(&self, mu: S) -> Result<Self> {
        Self::new(self.q, self.h, mu, self.x_a, self.x_v, self.r)
    }

    pub fn with_vaccination(&self, x_a: S, x_v: S) -> Result<Self> {
        Self::new(self.q, self.h, self.mu, x_a, x_v, self.r)
    }

    pub fn with_r(&self, r: S) -> Result<Self> {
        Self::new(self.q, self.h, self.mu, self.x_a, self.x_v, r)
    }

    /// Fails unless `x_a <= x_v`.
    pub fn require_ordered(&self) -> Result<()> {
        if self.x_a <= self.x_v {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "expected x_a <= x_v, got x_a = {}, x_v = {}",
                self.x_a, self.x_v
            )))
        }
    }

    /// Same economy with the group labels exchanged.
    pub fn relabeled(&self) -> Self {
        Self {
            q: S::one() - self.q,
            x_a: self.x_v,
            x_v: self.x_a,
            ..*self
        }
    }

    /// Within-group meeting rates `(q~_a, q~_v)`.
    #[inline]
    pub fn meeting_rates(&self) -> (S, S) {
        let one = S::one();
        let qa = self.h + (one - self.h) * self.q;
        let qv = self.h + (one - self.h) * (one - self.q);
        (qa, qv)
    }

    /// Population vaccination rate `x = q x_a + (1 - q) x_v`.
    #[inline]
    pub fn aggregate_vaccination(&self) -> S {
        self.q * self.x_a + (S::one() - self.q) * self.x_v
    }

    /// Upper corner of the feasible infection box.
    #[inline]
    pub fn box_upper(&self) -> [S; 2] {
        [S::one() - self.x_a, S::one() - self.x_v]
    }
}

/// Infected shares `(rho_a, rho_v)` of each group's population.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InfectionState<S> {
    pub rho_a: S,
    pub rho_v: S,
}

impl<S: Scalar> InfectionState<S> {
    pub fn new(rho_a: S, rho_v: S) -> Self {
        Self { rho_a, rho_v }
    }

    pub fn from_array(v: [S; 2]) -> Self {
        Self::new(v[0], v[1])
    }

    pub fn to_array(self) -> [S; 2] {
        [self.rho_a, self.rho_v]
    }

    /// Susceptible shares `S_g = 1 - rho_g - x_g`.
    pub fn susceptible(&self, p: &ModelParams<S>) -> (S, S) {
        (
            S::one() - self.rho_a - p.x_a(),
            S::one() - self.rho_v - p.x_v(),
        )
    }

    /// Infection exposure `(rho~_a, rho~_v)` seen by a member of each group.
    pub fn exposure(&self, p: &ModelParams<S>) -> (S, S) {
        let one = S::one();
        let (qa, qv) = p.meeting_rates();
        (
            qa * self.rho_a + (one - qa) * self.rho_v,
            qv * self.rho_v + (one - qv) * self.rho_a,
        )
    }

    /// Population infection rate `q rho_a + (1 - q) rho_v`.
    pub fn aggregate(&self, p: &ModelParams<S>) -> S {
        p.q() * self.rho_a + (S::one() - p.q()) * self.rho_v
    }

    /// Largest distance by which the state lies outside the feasible box.
    pub fn box_violation(&self, p: &ModelParams<S>) -> S {
        let [ua, uv] = p.box_upper();
        let z = S::zero();
        (-self.rho_a)
            .max(-self.rho_v)
            .max(self.rho_a - ua)
            .max(self.rho_v - uv)
            .max(z)
    }

    /// Projects onto the feasible box.
    pub fn clamped(&self, p: &ModelParams<S>) -> Self {
        let [ua, uv] = p.box_upper();
        Self::new(
            self.rho_a.clamp_to(S::zero(), ua),
            self.rho_v.clamp_to(S::zero(), uv),
        )
    }

    /// Validates the state against the box, tolerating `slack`.
    pub fn check(&self, p: &ModelParams<S>, slack: S) -> Result<()> {
        let v = self.box_violation(p);
        if v <= slack && self.rho_a.is_finite() && self.rho_v.is_finite() {
            Ok(())
        } else {
            Err(Error::StateOutOfBox {
                rho_a: self.rho_a.as_f64(),
                rho_v: self.rho_v.as_f64(),
                violation: v.as_f64(),
            })
        }
    }
}
