use super::{Classification, Level, ModelKind, VaccinationEquilibrium, VaccinationParams};
use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::params::ModelParams;
use crate::statics::{steady_state_derivative, ShiftParam};
use crate::steady_state::{solve_steady_state, SteadyState};
use crate::Scalar;

const SCAN: usize = 256;
const BISECTION_STEPS: usize = 200;

/// Risk measure driving vaxxers in the mixed model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MixedVariant {
    /// `x_v = k rho_v`.
    #[default]
    AsWritten,
    /// `x_v = k theta_v = k rho_v / (1 - x_v)`.
    Theta,
}

/// Mixed-model equilibrium: anti-vaxxers follow peers, vaxxers respond to
/// infection risk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedEquilibrium<S> {
    pub equilibrium: VaccinationEquilibrium<S>,
    pub variant: MixedVariant,
    /// Number of roots seen by the scan in `x_v`.
    pub roots_found: usize,
}

fn check_precondition<S: Scalar>(base: &ModelParams<S>, vp: &VaccinationParams<S>) -> Result<()> {
    let (qa, _) = base.meeting_rates();
    if vp.k * qa < S::one() {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "mixed model needs k q~_a < 1, got {}",
            vp.k * qa
        )))
    }
}

/// Anti-vaxxer response to `x_v`, unclamped.
fn peer_response<S: Scalar>(base: &ModelParams<S>, vp: &VaccinationParams<S>, x_v: S) -> S {
    let (qa, _) = base.meeting_rates();
    (vp.k * (S::one() - qa) * x_v - vp.d) / (S::one() - vp.k * qa)
}

fn risk<S: Scalar>(variant: MixedVariant, p: &ModelParams<S>, ss: &SteadyState<S>) -> S {
    match variant {
        MixedVariant::AsWritten => ss.state.rho_v,
        MixedVariant::Theta => {
            if ss.state.rho_a.max(ss.state.rho_v) <= S::zero() {
                S::zero()
            } else {
                ss.exposure.1 / (ss.exposure.1 + p.mu())
            }
        }
    }
}

fn evaluate<S: Scalar>(
    base: &ModelParams<S>,
    vp: &VaccinationParams<S>,
    variant: MixedVariant,
    x_v: S,
) -> Result<(S, S, SteadyState<S>)> {
    let x_a = peer_response(base, vp, x_v).clamp_to(S::zero(), S::one());
    let p = base.with_vaccination(x_a, x_v)?;
    let ss = solve_steady_state(&p)?;
    Ok((x_a, vp.k * risk(variant, &p, &ss) - x_v, ss))
}

fn level<S: Scalar>(t: S) -> Level {
    if t <= S::zero() {
        Level::Zero
    } else if t >= S::one() {
        Level::One
    } else {
        Level::Interior
    }
}

/// Solves the mixed model by reducing to a scalar equation in `x_v`.
pub fn solve_mixed_equilibrium<S: Scalar>(
    base: &ModelParams<S>,
    vp: &VaccinationParams<S>,
    variant: MixedVariant,
) -> Result<MixedEquilibrium<S>> {
    check_precondition(base, vp)?;
    let (zero, one) = (S::zero(), S::one());
    let g = |t: S| evaluate(base, vp, variant, t).map(|(_, g, _)| g);

    let mut roots = Vec::new();
    let mut prev = (zero, g(zero)?);
    if prev.1 <= zero {
        roots.push(zero);
    }
    for i in 1..=SCAN {
        let t = S::lit(i as f64 / SCAN as f64);
        let gt = g(t)?;
        if prev.1 > zero && gt <= zero {
            let (mut lo, mut hi) = (prev.0, t);
            for _ in 0..BISECTION_STEPS {
                let mid = S::lit(0.5) * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                if g(mid)? > zero {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(S::lit(0.5) * (lo + hi));
        }
        prev = (t, gt);
    }
    if prev.1 > zero {
        roots.push(one);
    }
    let x_v = *roots.first().ok_or(Error::NonConvergence {
        what: "mixed equilibrium scan",
        iterations: SCAN,
        residual: f64::NAN,
    })?;
    let (x_a, gv, ss) = evaluate(base, vp, variant, x_v)?;
    let raw_a = peer_response(base, vp, x_v);
    let class = Classification::new(level(raw_a), level(x_v));
    let residual = if class.v == Level::Interior { gv.abs() } else { zero };
    let mut eq = MixedEquilibrium {
        equilibrium: VaccinationEquilibrium {
            x_a,
            x_v,
            kind: ModelKind::Mixed,
            classification: class,
            dh: None,
            induced: Some(ss),
            residual,
        },
        variant,
        roots_found: roots.len(),
    };
    if class.is_interior() && ss.is_interior() {
        eq.equilibrium.dh = dh_mixed(base, vp, &eq).ok();
    }
    Ok(eq)
}

/// Implicit-function homophily derivative `(dx_a/dh, dx_v/dh)` of an
/// interior mixed equilibrium.
pub fn dh_mixed<S: Scalar>(
    base: &ModelParams<S>,
    vp: &VaccinationParams<S>,
    eq: &MixedEquilibrium<S>,
) -> Result<[S; 2]> {
    check_precondition(base, vp)?;
    let e = &eq.equilibrium;
    if !e.classification.is_interior() {
        return Err(Error::Precondition(format!(
            "homophily derivative needs an interior equilibrium, got {}",
            e.classification.label()
        )));
    }
    let one = S::one();
    let k = vp.k;
    let p = base.with_vaccination(e.x_a, e.x_v)?;
    let ss = match e.induced {
        Some(ss) => ss,
        None => solve_steady_state(&p)?,
    };
    let (qa, _) = p.meeting_rates();
    let da = steady_state_derivative(&p, &ss, ShiftParam::XA)?;
    let dv = steady_state_derivative(&p, &ss, ShiftParam::XV)?;
    let dh = steady_state_derivative(&p, &ss, ShiftParam::H)?;
    let (r_xa, r_xv, r_h) = match eq.variant {
        MixedVariant::AsWritten => (da[1], dv[1], dh[1]),
        MixedVariant::Theta => {
            let u = one - e.x_v;
            (da[1] / u, dv[1] / u + ss.state.rho_v / (u * u), dh[1] / u)
        }
    };
    let jx = Mat2::new(one - k * qa, -k * (one - qa), -k * r_xa, one - k * r_xv);
    let jh = [k * (one - p.q()) * (e.x_v - e.x_a), -k * r_h];
    jx.solve([-jh[0], -jh[1]]).ok_or(Error::Singular {
        what: "mixed equilibrium jacobian",
    })
}
