//! Endogenous vaccination: rational, peer-effect and mixed equilibria,
//! welfare and the planner benchmark.

mod mixed;
mod peer;
mod rational;
mod welfare;

pub use mixed::{dh_mixed, solve_mixed_equilibrium, MixedEquilibrium, MixedVariant};
pub use peer::{
    dh_peer, enumerate_peer_equilibria, peer_best_response, peer_case_conditions,
    peer_interior_closed_form, PeerCaseConditions, PeerEnumeration,
};
pub use rational::{
    dh_rational, rational_best_response, rational_multistart, solve_rational_equilibria,
    solve_rational_equilibrium, RationalAudit,
};
pub use welfare::{
    decentralized_homogeneous, optimal_vaccination, planner_welfare, utilitarian_welfare,
    welfare, OptimalVaccination, WelfareReport,
};

use crate::error::{Error, Result};
use crate::steady_state::SteadyState;
use crate::Scalar;

/// Cost-side parameters: cost density `k`, anti-vaxxer aversion `d`,
/// congestion weight `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VaccinationParams<S> {
    pub k: S,
    pub d: S,
    pub b: S,
}

impl<S: Scalar> VaccinationParams<S> {
    pub fn new(k: S, d: S, b: S) -> Result<Self> {
        let bad = |name, value: S, expected| Error::InvalidParameter {
            name,
            value: value.as_f64(),
            expected,
        };
        if !(k > S::zero() && k.is_finite()) {
            return Err(bad("k", k, "k > 0"));
        }
        if !(d >= S::zero() && d.is_finite()) {
            return Err(bad("d", d, "d >= 0"));
        }
        if !(b >= S::zero() && b.is_finite()) {
            return Err(bad("b", b, "b >= 0"));
        }
        Ok(Self { k, d, b })
    }
}

/// Where one group's vaccination rate sits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Level {
    Zero,
    Interior,
    One,
}

impl Level {
    pub const ALL: [Level; 3] = [Level::Interior, Level::Zero, Level::One];

    fn name(self) -> &'static str {
        match self {
            Level::Zero => "Zero",
            Level::Interior => "Interior",
            Level::One => "One",
        }
    }

    pub(crate) fn pinned<S: Scalar>(self) -> Option<S> {
        match self {
            Level::Zero => Some(S::zero()),
            Level::One => Some(S::one()),
            Level::Interior => None,
        }
    }

    /// Consistency of a pinned level with the unclamped best response.
    pub(crate) fn admits<S: Scalar>(self, raw: S, tol: S) -> bool {
        match self {
            Level::Zero => raw <= tol,
            Level::One => raw >= S::one() - tol,
            Level::Interior => raw > S::zero() && raw < S::one(),
        }
    }
}

/// Corner pattern of an equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Classification {
    pub a: Level,
    pub v: Level,
}

impl Classification {
    pub fn new(a: Level, v: Level) -> Self {
        Self { a, v }
    }

    pub fn is_interior(&self) -> bool {
        self.a == Level::Interior && self.v == Level::Interior
    }

    /// Short label such as `interior`, `bothZero` or `aZero_vOne`.
    pub fn label(&self) -> String {
        match (self.a, self.v) {
            (Level::Interior, Level::Interior) => "interior".into(),
            (Level::Zero, Level::Zero) => "bothZero".into(),
            (Level::One, Level::One) => "bothOne".into(),
            (a, v) => format!("a{}_v{}", a.name(), v.name()),
        }
    }
}

/// Which behavioural model produced an equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModelKind {
    Rational,
    Peer,
    Mixed,
}

/// A vaccination equilibrium and the steady state it induces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VaccinationEquilibrium<S> {
    pub x_a: S,
    pub x_v: S,
    pub kind: ModelKind,
    pub classification: Classification,
    /// `(dx_a/dh, dx_v/dh)` on interior branches.
    pub dh: Option<[S; 2]>,
    pub induced: Option<SteadyState<S>>,
    /// Max-norm of `x - BR(x)`.
    pub residual: S,
}
