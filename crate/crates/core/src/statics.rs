//! Comparative statics of the steady state, cumulative infection and
//! convergence rate.

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::linearized::{CumulativeInfection, LinearizedSystem};
use crate::params::{InfectionState, ModelParams};
use crate::steady_state::{solve_steady_state, SteadyState};
use crate::Scalar;

/// Variable with respect to which the Jacobian is differentiated. The
/// infection rates are treated as independent of the parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ParamId {
    H,
    RhoA,
    RhoV,
    XA,
    XV,
}

impl ParamId {
    pub const ALL: [ParamId; 5] = [
        ParamId::H,
        ParamId::RhoA,
        ParamId::RhoV,
        ParamId::XA,
        ParamId::XV,
    ];
}

/// Entrywise partial derivative of the Jacobian at `st`.
pub fn jacobian_partial<S: Scalar>(
    p: &ModelParams<S>,
    st: &InfectionState<S>,
    which: ParamId,
) -> Mat2<S> {
    let (zero, one, two) = (S::zero(), S::one(), S::lit(2.0));
    let q = p.q();
    let (qa, qv) = p.meeting_rates();
    let (sa, sv) = st.susceptible(p);
    let gap = st.rho_a - st.rho_v;
    match which {
        ParamId::H => Mat2::new(
            -(one - q) * gap + sa * (one - q),
            -(one - q) * sa,
            -q * sv,
            q * gap + sv * q,
        ),
        ParamId::RhoA => Mat2::new(-two * qa, -(one - qa), zero, -(one - qv)),
        ParamId::RhoV => Mat2::new(-(one - qa), zero, -(one - qv), -two * qv),
        ParamId::XA => Mat2::new(-qa, -(one - qa), zero, zero),
        ParamId::XV => Mat2::new(zero, zero, -(one - qv), -qv),
    }
}

/// Parameter that shifts the steady state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ShiftParam {
    H,
    XA,
    XV,
}

fn dynamics_partial<S: Scalar>(p: &ModelParams<S>, ss: &SteadyState<S>, which: ShiftParam) -> [S; 2] {
    let q = p.q();
    let st = ss.state;
    let (sa, sv) = ss.susceptible;
    let (ea, ev) = ss.exposure;
    let gap = st.rho_a - st.rho_v;
    match which {
        ShiftParam::H => [sa * (S::one() - q) * gap, -sv * q * gap],
        ShiftParam::XA => [-ea, S::zero()],
        ShiftParam::XV => [S::zero(), -ev],
    }
}

fn require_interior<S: Scalar>(ss: &SteadyState<S>) -> Result<()> {
    if ss.is_interior() {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "requires an interior steady state, got {:?}",
            ss.kind
        )))
    }
}

/// Implicit-function derivative of `(rho_a, rho_v)` with respect to `which`.
pub fn steady_state_derivative<S: Scalar>(
    p: &ModelParams<S>,
    ss: &SteadyState<S>,
    which: ShiftParam,
) -> Result<[S; 2]> {
    require_interior(ss)?;
    let j = crate::model::jacobian_at(p, &ss.state);
    let f = dynamics_partial(p, ss, which);
    j.solve([-f[0], -f[1]]).ok_or(Error::Singular {
        what: "steady-state jacobian",
    })
}

/// Homophily derivatives of the steady state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HomophilySensitivity<S> {
    pub d_rho_a: S,
    pub d_rho_v: S,
    pub d_rho: S,
    pub det_jacobian: S,
}

pub fn dh_steady_state<S: Scalar>(
    p: &ModelParams<S>,
    ss: &SteadyState<S>,
) -> Result<HomophilySensitivity<S>> {
    let [d_rho_a, d_rho_v] = steady_state_derivative(p, ss, ShiftParam::H)?;
    Ok(HomophilySensitivity {
        d_rho_a,
        d_rho_v,
        d_rho: p.q() * d_rho_a + (S::one() - p.q()) * d_rho_v,
        det_jacobian: crate::model::jacobian_at(p, &ss.state).det(),
    })
}

/// Derivative of cumulative infection with respect to one Jacobian input.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiDerivative<S> {
    pub d_ci_a: S,
    pub d_ci_v: S,
    pub d_total: S,
}

/// `r (rI - J)^{-1} (dJ) (rI - J)^{-1} d0` for `dJ = d J / d which`.
pub fn dparam_ci<S: Scalar>(
    p: &ModelParams<S>,
    ss: &SteadyState<S>,
    sys: &LinearizedSystem<S>,
    d0: [S; 2],
    which: ParamId,
) -> Result<CiDerivative<S>> {
    let r = p.r();
    let res = Mat2::identity()
        .scale(r)
        .sub(&sys.jacobian)
        .inverse()
        .ok_or(Error::Singular {
            what: "cumulative infection resolvent",
        })?;
    let dj = jacobian_partial(p, &ss.state, which);
    let v = res.mul(&dj).mul(&res).scale(r).mul_vec(d0);
    Ok(CiDerivative {
        d_ci_a: v[0],
        d_ci_v: v[1],
        d_total: p.q() * v[0] + (S::one() - p.q()) * v[1],
    })
}

/// Split of `d CI / d h` into the effect at a fixed steady state and the
/// effect through the steady state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CiDecomposition<S> {
    pub direct: S,
    pub indirect: S,
    pub total: S,
    pub ci: CumulativeInfection<S>,
}

pub fn dh_ci_total<S: Scalar>(
    p: &ModelParams<S>,
    ss: &SteadyState<S>,
    sys: &LinearizedSystem<S>,
    d0: [S; 2],
) -> Result<CiDecomposition<S>> {
    let hs = dh_steady_state(p, ss)?;
    let direct = dparam_ci(p, ss, sys, d0, ParamId::H)?.d_total;
    let via_a = dparam_ci(p, ss, sys, d0, ParamId::RhoA)?.d_total;
    let via_v = dparam_ci(p, ss, sys, d0, ParamId::RhoV)?.d_total;
    let indirect = via_a * hs.d_rho_a + via_v * hs.d_rho_v;
    Ok(CiDecomposition {
        direct,
        indirect,
        total: direct + indirect,
        ci: sys.cumulative_infection(p, d0)?,
    })
}

/// Total homophily derivatives when vaccination responds with `dx/dh`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TotalSensitivity<S> {
    pub d_rho_a: S,
    pub d_rho_v: S,
    pub d_rho: S,
    pub d_ci: S,
}

/// Chain rule through `x(h)`: `d rho = dh rho + dx rho . dx/dh` and the
/// same for cumulative infection, including the steady-state response.
pub fn dh_with_vaccination_response<S: Scalar>(
    p: &ModelParams<S>,
    ss: &SteadyState<S>,
    sys: &LinearizedSystem<S>,
    d0: [S; 2],
    dx_dh: [S; 2],
) -> Result<TotalSensitivity<S>> {
    let rh = steady_state_derivative(p, ss, ShiftParam::H)?;
    let ra = steady_state_derivative(p, ss, ShiftParam::XA)?;
    let rv = steady_state_derivative(p, ss, ShiftParam::XV)?;
    let drho = [
        rh[0] + ra[0] * dx_dh[0] + rv[0] * dx_dh[1],
        rh[1] + ra[1] * dx_dh[0] + rv[1] * dx_dh[1],
    ];
    let ci = |which| dparam_ci(p, ss, sys, d0, which).map(|c| c.d_total);
    let d_ci = ci(ParamId::H)?
        + ci(ParamId::XA)? * dx_dh[0]
        + ci(ParamId::XV)? * dx_dh[1]
        + ci(ParamId::RhoA)? * drho[0]
        + ci(ParamId::RhoV)? * drho[1];
    Ok(TotalSensitivity {
        d_rho_a: drho[0],
        d_rho_v: drho[1],
        d_rho: p.q() * drho[0] + (S::one() - p.q()) * drho[1],
        d_ci,
    })
}

/// Homophily derivative of the slowest eigenvalue `lambda_2` (signed).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlowModeSensitivity<S> {
    /// Steady state held fixed.
    pub direct: S,
    pub d_rho_a: S,
    pub d_rho_v: S,
    /// Including the steady-state response.
    pub total: S,
}

pub fn dh_slowest_eigenvalue<S: Scalar>(
    p: &ModelParams<S>,
    ss: &SteadyState<S>,
    sys: &LinearizedSystem<S>,
) -> Result<SlowModeSensitivity<S>> {
    let st = &ss.state;
    let direct = sys.eigenvalue_sensitivity(&jacobian_partial(p, st, ParamId::H));
    let d_rho_a = sys.eigenvalue_sensitivity(&jacobian_partial(p, st, ParamId::RhoA));
    let d_rho_v = sys.eigenvalue_sensitivity(&jacobian_partial(p, st, ParamId::RhoV));
    let hs = dh_steady_state(p, ss)?;
    Ok(SlowModeSensitivity {
        direct,
        d_rho_a,
        d_rho_v,
        total: direct + d_rho_a * hs.d_rho_a + d_rho_v * hs.d_rho_v,
    })
}

/// Discrete-time outbreak `d_t = J^t d0` after a uniform shock `dbar`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteOutbreak<S> {
    pub steps: Vec<[S; 2]>,
    pub aggregate: Vec<S>,
    /// `d_t,a - d_t,v`.
    pub gap: Vec<S>,
    /// `(1 - x - mu - 2 rho) dbar`.
    pub first_aggregate: S,
    /// `(S_a - S_v - h (rho_a - rho_v)) dbar`.
    pub first_gap: S,
}

pub fn discrete_outbreak<S: Scalar>(
    p: &ModelParams<S>,
    ss: &SteadyState<S>,
    dbar: S,
    n: usize,
) -> DiscreteOutbreak<S> {
    let j = crate::model::jacobian_at(p, &ss.state);
    let q = p.q();
    let mut d = [dbar, dbar];
    let mut steps = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        steps.push(d);
        d = j.mul_vec(d);
    }
    let aggregate = steps
        .iter()
        .map(|s| q * s[0] + (S::one() - q) * s[1])
        .collect();
    let gap = steps.iter().map(|s| s[0] - s[1]).collect();
    let rho = ss.rho(p);
    let (sa, sv) = ss.susceptible;
    DiscreteOutbreak {
        steps,
        aggregate,
        gap,
        first_aggregate: (S::one() - p.aggregate_vaccination() - p.mu() - S::lit(2.0) * rho) * dbar,
        first_gap: (sa - sv - p.h() * (ss.state.rho_a - ss.state.rho_v)) * dbar,
    }
}

/// Maximizes `f` on `[lo, hi]`: grid scan with `grid` intervals, then golden
/// section on the best bracket.
pub fn locate_maximum<S, F>(mut f: F, lo: S, hi: S, grid: usize, tol: S) -> Result<(S, S)>
where
    S: Scalar,
    F: FnMut(S) -> Result<S>,
{
    let n = grid.max(2);
    let step = (hi - lo) / S::lit(n as f64);
    let mut best = (lo, f(lo)?);
    let mut best_i = 0;
    for i in 1..=n {
        let x = if i == n { hi } else { lo + step * S::lit(i as f64) };
        let v = f(x)?;
        if v > best.1 {
            best = (x, v);
            best_i = i;
        }
    }
    let mut a = if best_i == 0 { lo } else { best.0 - step };
    let mut b = if best_i == n { hi } else { best.0 + step };
    let inv_phi = S::lit(0.618_033_988_749_894_9);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while (b - a).abs() > tol {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    let x = S::lit(0.5) * (a + b);
    let v = f(x)?;
    Ok(if v >= best.1 { (x, v) } else { best })
}

/// Homophily level maximizing the steady-state infection rate.
pub fn rho_peak_in_h<S: Scalar>(p: &ModelParams<S>) -> Result<(S, S)> {
    locate_maximum(
        |h| Ok(solve_steady_state(&p.with_h(h)?)?.rho(p)),
        S::zero(),
        S::one(),
        200,
        S::lit(1e-9),
    )
}

/// Homophily level minimizing cumulative infection after shock `d0`.
pub fn ci_trough_in_h<S: Scalar>(p: &ModelParams<S>, d0: [S; 2]) -> Result<(S, S)> {
    let (h, neg) = locate_maximum(
        |h| {
            let ph = p.with_h(h)?;
            let ss = solve_steady_state(&ph)?;
            let sys = LinearizedSystem::at(&ph, &ss)?;
            Ok(-sys.cumulative_infection(&ph, d0)?.total)
        },
        S::zero(),
        S::one(),
        200,
        S::lit(1e-9),
    )?;
    Ok((h, -neg))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobian_partials_match_finite_differences() {
        let p = ModelParams::<f64>::new(0.3, 0.45, 0.2, 0.1, 0.5, 0.2).unwrap();
        let st = InfectionState::new(0.35, 0.12);
        let e = 1e-6;
        let j = |p: &ModelParams<f64>, st: &InfectionState<f64>| crate::model::jacobian_at(p, st);
        for which in ParamId::ALL {
            let (plus, minus) = match which {
                ParamId::H => (j(&p.with_h(p.h() + e).unwrap(), &st), j(&p.with_h(p.h() - e).unwrap(), &st)),
                ParamId::RhoA => (
                    j(&p, &InfectionState::new(st.rho_a + e, st.rho_v)),
                    j(&p, &InfectionState::new(st.rho_a - e, st.rho_v)),
                ),
                ParamId::RhoV => (
                    j(&p, &InfectionState::new(st.rho_a, st.rho_v + e)),
                    j(&p, &InfectionState::new(st.rho_a, st.rho_v - e)),
                ),
                ParamId::XA => (
                    j(&p.with_vaccination(p.x_a() + e, p.x_v()).unwrap(), &st),
                    j(&p.with_vaccination(p.x_a() - e, p.x_v()).unwrap(), &st),
                ),
                ParamId::XV => (
                    j(&p.with_vaccination(p.x_a(), p.x_v() + e).unwrap(), &st),
                    j(&p.with_vaccination(p.x_a(), p.x_v() - e).unwrap(), &st),
                ),
            };
            let fd = plus.sub(&minus).scale(0.5 / e);
            let an = jacobian_partial(&p, &st, which);
            assert!(fd.sub(&an).max_abs() < 1e-8, "{which:?}");
        }
    }

    #[test]
    fn golden_section_finds_parabola_peak() {
        let (x, v) = locate_maximum(|x: f64| Ok(-(x - 0.3141).powi(2)), 0.0, 1.0, 10, 1e-10).unwrap();
        assert!((x - 0.3141).abs() < 1e-8);
        assert!(v.abs() < 1e-15);
    }

    #[test]
    fn first_discrete_step_matches_closed_form() {
        let p = ModelParams::<f64>::new(0.3, 0.45, 0.2, 0.1, 0.5, 0.2).unwrap();
        let ss = solve_steady_state(&p).unwrap();
        let out = discrete_outbreak(&p, &ss, 1e-3, 3);
        assert!((out.aggregate[1] - out.first_aggregate).abs() < 1e-15);
        assert!((out.gap[1] - out.first_gap).abs() < 1e-15);
    }
}
