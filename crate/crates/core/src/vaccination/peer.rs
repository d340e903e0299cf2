use super::{Classification, Level, ModelKind, VaccinationEquilibrium};
use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::Scalar;

fn meeting<S: Scalar>(q: S, h: S) -> (S, S) {
    let one = S::one();
    (h + (one - h) * q, h + (one - h) * (one - q))
}

/// Unclamped peer best response: vaccination follows the exposure-weighted
/// vaccination of contacts, shifted down by `d` for anti-vaxxers.
pub fn peer_best_response<S: Scalar>(q: S, h: S, k: S, d: S, x: [S; 2]) -> [S; 2] {
    let one = S::one();
    let (qa, qv) = meeting(q, h);
    [
        k * (qa * x[0] + (one - qa) * x[1]) - d,
        k * (qv * x[1] + (one - qv) * x[0]),
    ]
}

/// Equilibria of the clamped peer map.
#[derive(Debug, Clone, PartialEq)]
pub struct PeerEnumeration<S> {
    pub equilibria: Vec<VaccinationEquilibrium<S>>,
    /// Patterns skipped because their linear system was singular (a
    /// continuum or no solution).
    pub degenerate_patterns: Vec<Classification>,
}

impl<S: Scalar> PeerEnumeration<S> {
    pub fn find(&self, class: Classification) -> Option<&VaccinationEquilibrium<S>> {
        self.equilibria.iter().find(|e| e.classification == class)
    }
}

/// Exact enumeration over the nine clamp patterns.
pub fn enumerate_peer_equilibria<S: Scalar>(q: S, h: S, k: S, d: S) -> PeerEnumeration<S> {
    let one = S::one();
    let (qa, qv) = meeting(q, h);
    let tol = S::lit(S::SOLVE_TOL * 1e3);
    let mut out = PeerEnumeration {
        equilibria: Vec::new(),
        degenerate_patterns: Vec::new(),
    };
    for a in Level::ALL {
        for v in Level::ALL {
            let class = Classification::new(a, v);
            let x = match (a.pinned::<S>(), v.pinned::<S>()) {
                (Some(xa), Some(xv)) => Some([xa, xv]),
                (None, Some(xv)) => {
                    let den = one - k * qa;
                    (den != S::zero()).then(|| [(k * (one - qa) * xv - d) / den, xv])
                }
                (Some(xa), None) => {
                    let den = one - k * qv;
                    (den != S::zero()).then(|| [xa, k * (one - qv) * xa / den])
                }
                (None, None) => Mat2::new(one - k * qa, -k * (one - qa), -k * (one - qv), one - k * qv)
                    .solve([-d, S::zero()]),
            };
            let Some(x) = x else {
                out.degenerate_patterns.push(class);
                continue;
            };
            let raw = peer_best_response(q, h, k, d, x);
            let ok_a = if a == Level::Interior { x[0] > S::zero() && x[0] < one } else { a.admits(raw[0], tol) };
            let ok_v = if v == Level::Interior { x[1] > S::zero() && x[1] < one } else { v.admits(raw[1], tol) };
            if ok_a && ok_v {
                let clamped = [raw[0].clamp_to(S::zero(), one), raw[1].clamp_to(S::zero(), one)];
                let one_h = one - h * k;
                let dh = class.is_interior().then(|| {
                    let den = one_h * one_h;
                    [-d * k * (one - q) / den, d * k * q / den]
                });
                out.equilibria.push(VaccinationEquilibrium {
                    x_a: x[0],
                    x_v: x[1],
                    kind: ModelKind::Peer,
                    classification: class,
                    dh,
                    induced: None,
                    residual: (x[0] - clamped[0]).abs().max((x[1] - clamped[1]).abs()),
                });
            }
        }
    }
    out
}

/// Interior solution
/// `x_a = d (1 - k q~_v) / ((k - 1)(1 - h k))`,
/// `x_v = d (1 - h) k q / ((k - 1)(1 - h k))`,
/// when it lies strictly inside the unit square.
pub fn peer_interior_closed_form<S: Scalar>(q: S, h: S, k: S, d: S) -> Option<[S; 2]> {
    let one = S::one();
    let den = (k - one) * (one - h * k);
    if den == S::zero() {
        return None;
    }
    let x_a = d * (one - k * (one - (one - h) * q)) / den;
    let x_v = d * (one - h) * k * q / den;
    let inside = |t: S| t > S::zero() && t < one;
    (inside(x_a) && inside(x_v)).then_some([x_a, x_v])
}

/// Homophily derivative of the interior branch:
/// `(-d k (1 - q), d k q) / (h k - 1)^2`.
///
/// At `d = 0` the branch collapses onto the origin and both derivatives
/// are zero.
pub fn dh_peer<S: Scalar>(q: S, h: S, k: S, d: S) -> Result<[S; 2]> {
    if d == S::zero() {
        return Ok([S::zero(); 2]);
    }
    let en = enumerate_peer_equilibria(q, h, k, d);
    if en.find(Classification::new(Level::Interior, Level::Interior)).is_none() {
        return Err(Error::Precondition("no interior peer equilibrium".into()));
    }
    let one = S::one();
    let den = (h * k - one) * (h * k - one);
    Ok([-d * k * (one - q) / den, d * k * q / den])
}

/// Sufficient conditions for each equilibrium type.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeerCaseConditions {
    pub both_zero: bool,
    pub both_one: bool,
    pub a_zero_v_one: bool,
    pub a_interior_v_one: bool,
}

pub fn peer_case_conditions<S: Scalar>(q: S, h: S, k: S, d: S) -> PeerCaseConditions {
    let one = S::one();
    let (qa, qv) = meeting(q, h);
    PeerCaseConditions {
        both_zero: true,
        both_one: k >= one + d,
        a_zero_v_one: k * qv >= one && k * (one - qa) <= d,
        a_interior_v_one: one + d > k && k * qv >= one && k * (one - qa) > d && k * qa < one,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interior_closed_form_agrees_with_enumeration() {
        let (q, h, k, d): (f64, f64, f64, f64) = (0.5, 0.1, 1.2, 0.05);
        let en = enumerate_peer_equilibria(q, h, k, d);
        let eq = en.find(Classification::new(Level::Interior, Level::Interior)).unwrap();
        let cf = peer_interior_closed_form(q, h, k, d).unwrap();
        assert!((eq.x_a - cf[0]).abs() < 1e-14);
        assert!((eq.x_v - cf[1]).abs() < 1e-14);
        assert!((cf[1] - cf[0] - d / (1.0 - h * k)).abs() < 1e-14);
    }

    #[test]
    fn zero_corner_always_present() {
        let en = enumerate_peer_equilibria(0.4, 0.7, 0.3, 0.1);
        assert!(en.find(Classification::new(Level::Zero, Level::Zero)).is_some());
    }

    #[test]
    fn labels() {
        assert_eq!(Classification::new(Level::Zero, Level::One).label(), "aZero_vOne");
        assert_eq!(Classification::new(Level::Interior, Level::One).label(), "aInterior_vOne");
        assert_eq!(Classification::new(Level::One, Level::One).label(), "bothOne");
    }
}
