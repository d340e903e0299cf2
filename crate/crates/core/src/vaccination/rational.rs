use super::{Classification, Level, ModelKind, VaccinationEquilibrium, VaccinationParams};
use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::params::ModelParams;
use crate::statics::{steady_state_derivative, ShiftParam};
use crate::steady_state::{solve_steady_state, SteadyState};
use crate::Scalar;

const MAX_NEWTON: usize = 200;
const BISECTION_STEPS: usize = 200;

/// Infection risk of an unvaccinated member, `theta_g = rho_g / (1 - x_g)`,
/// written as `rho~_g / (rho~_g + mu)` so that it stays defined at `x_g = 1`.
fn theta<S: Scalar>(p: &ModelParams<S>, ss: &SteadyState<S>) -> [S; 2] {
    let (ea, ev) = ss.exposure;
    if ss.state.rho_a.max(ss.state.rho_v) <= S::zero() {
        return [S::zero(); 2];
    }
    [ea / (ea + p.mu()), ev / (ev + p.mu())]
}

/// `d theta / d x` (rows: group, columns: x_a, x_v) and `d theta / d h`.
/// Zero away from interior steady states.
fn theta_derivatives<S: Scalar>(p: &ModelParams<S>, ss: &SteadyState<S>) -> Result<(Mat2<S>, [S; 2])> {
    if !ss.is_interior() {
        return Ok((Mat2::default(), [S::zero(); 2]));
    }
    let one = S::one();
    let (qa, qv) = p.meeting_rates();
    let (ea, ev) = ss.exposure;
    let ga = p.mu() / ((ea + p.mu()) * (ea + p.mu()));
    let gv = p.mu() / ((ev + p.mu()) * (ev + p.mu()));
    let expo = |d: [S; 2]| [qa * d[0] + (one - qa) * d[1], qv * d[1] + (one - qv) * d[0]];
    let dxa = expo(steady_state_derivative(p, ss, ShiftParam::XA)?);
    let dxv = expo(steady_state_derivative(p, ss, ShiftParam::XV)?);
    let mut dh = expo(steady_state_derivative(p, ss, ShiftParam::H)?);
    let gap = ss.state.rho_a - ss.state.rho_v;
    dh[0] += (one - p.q()) * gap;
    dh[1] -= p.q() * gap;
    Ok((
        Mat2::new(ga * dxa[0], ga * dxv[0], gv * dxa[1], gv * dxv[1]),
        [ga * dh[0], gv * dh[1]],
    ))
}

/// Unclamped best response `(k theta_a - d, k theta_v)` at `x`, with the
/// steady state it is computed from.
pub fn rational_best_response<S: Scalar>(
    base: &ModelParams<S>,
    vp: &VaccinationParams<S>,
    x: [S; 2],
) -> Result<([S; 2], SteadyState<S>)> {
    let p = base.with_vaccination(x[0], x[1])?;
    let ss = solve_steady_state(&p)?;
    let th = theta(&p, &ss);
    Ok(([vp.k * th[0] - vp.d, vp.k * th[1]], ss))
}

fn residual<S: Scalar>(x: [S; 2], raw: [S; 2]) -> S {
    (x[0] - raw[0]).abs().max((x[1] - raw[1]).abs())
}

/// Damped Newton on `x = BR(x)` restricted to the unit square.
fn interior_newton<S: Scalar>(
    base: &ModelParams<S>,
    vp: &VaccinationParams<S>,
    start: [S; 2],
) -> Result<[S; 2]> {
    let (zero, one) = (S::zero(), S::one());
    let tol = S::lit(S::SOLVE_TOL);
    let proj = |v: [S; 2]| [v[0].clamp_to(zero, one), v[1].clamp_to(zero, one)];
    let mut x = proj(start);
    let (mut raw, mut ss) = rational_best_response(base, vp, x)?;
    let mut norm = residual(x, raw);
    for _ in 0..MAX_NEWTON {
        if norm <= tol {
            return Ok(x);
        }
        let p = base.with_vaccination(x[0], x[1])?;
        let (dth, _) = theta_derivatives(&p, &ss)?;
        let jac = Mat2::identity().sub(&dth.scale(vp.k));
        let f = [x[0] - raw[0], x[1] - raw[1]];
        let step = jac.solve([-f[0], -f[1]]).ok_or(Error::Singular {
            what: "rational equilibrium Newton step",
        })?;
        let mut alpha = one;
        let mut moved = false;
        for _ in 0..40 {
            let trial = proj([x[0] + alpha * step[0], x[1] + alpha * step[1]]);
            let (rt, st) = rational_best_response(base, vp, trial)?;
            let nt = residual(trial, rt);
            if nt < (one - S::lit(1e-4) * alpha) * norm {
                x = trial;
                raw = rt;
                ss = st;
                norm = nt;
                moved = true;
                break;
            }
            alpha *= S::lit(0.5);
        }
        if !moved {
            break;
        }
    }
    if norm <= S::lit(S::SOLVE_TOL * 1e3) {
        Ok(x)
    } else {
        Err(Error::NonConvergence {
            what: "rational equilibrium Newton",
            iterations: MAX_NEWTON,
            residual: norm.as_f64(),
        })
    }
}

/// Root of the decreasing map `x -> raw_g(x) - x` in the free coordinate.
fn bisect_free<S: Scalar>(
    base: &ModelParams<S>,
    vp: &VaccinationParams<S>,
    free: usize,
    pinned: S,
) -> Result<Option<S>> {
    let at = |t: S| {
        let x = if free == 0 { [t, pinned] } else { [pinned, t] };
        rational_best_response(base, vp, x).map(|(raw, _)| raw[free] - t)
    };
    let (mut lo, mut hi) = (S::zero(), S::one());
    if at(lo)? <= S::zero() || at(hi)? >= S::zero() {
        return Ok(None);
    }
    for _ in 0..BISECTION_STEPS {
        let mid = S::lit(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if at(mid)? > S::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(S::lit(0.5) * (lo + hi)))
}

fn finish<S: Scalar>(
    base: &ModelParams<S>,
    vp: &VaccinationParams<S>,
    x: [S; 2],
    class: Classification,
) -> Result<Option<VaccinationEquilibrium<S>>> {
    let (raw, ss) = rational_best_response(base, vp, x)?;
    let tol = S::lit(1e-9);
    if !class.a.admits(raw[0], tol) && class.a != Level::Interior
        || !class.v.admits(raw[1], tol) && class.v != Level::Interior
    {
        return Ok(None);
    }
    let clamped = [
        raw[0].clamp_to(S::zero(), S::one()),
        raw[1].clamp_to(S::zero(), S::one()),
    ];
    let mut eq = VaccinationEquilibrium {
        x_a: x[0],
        x_v: x[1],
        kind: ModelKind::Rational,
        classification: class,
        dh: None,
        induced: Some(ss),
        residual: residual(x, clamped),
    };
    if class.is_interior() {
        eq.dh = dh_rational(base, vp, &eq).ok();
    }
    Ok(Some(eq))
}

fn inside<S: Scalar>(t: S) -> bool {
    t > S::zero() && t < S::one()
}

/// All equilibria of the clamped best-response map, interior first.
///
/// The interior branch is found by Newton from a 3x3 grid of starts; each
/// corner pattern is solved in its free coordinate by bisection.
pub fn solve_rational_equilibria<S: Scalar>(
    base: &ModelParams<S>,
    vp: &VaccinationParams<S>,
) -> Result<Vec<VaccinationEquilibrium<S>>> {
    let mut found: Vec<VaccinationEquilibrium<S>> = Vec::new();
    let push = |e: VaccinationEquilibrium<S>, found: &mut Vec<VaccinationEquilibrium<S>>| {
        let dup = found.iter().any(|f| {
            (f.x_a - e.x_a).abs().max((f.x_v - e.x_v).abs()) <= S::lit(1e-8)
        });
        if !dup {
            found.push(e);
        }
    };
    for root in rational_multistart(base, vp).roots {
        if inside(root[0]) && inside(root[1]) {
            if let Some(e) = finish(base, vp, root, Classification::new(Level::Interior, Level::Interior))? {
                push(e, &mut found);
            }
        }
    }
    for a in Level::ALL {
        for v in Level::ALL {
            let class = Classification::new(a, v);
            let x = match (a.pinned::<S>(), v.pinned::<S>()) {
                (None, None) => continue,
                (Some(xa), Some(xv)) => Some([xa, xv]),
                (None, Some(xv)) => bisect_free(base, vp, 0, xv)?.map(|t| [t, xv]),
                (Some(xa), None) => bisect_free(base, vp, 1, xa)?.map(|t| [xa, t]),
            };
            if let Some(x) = x {
                if let Some(e) = finish(base, vp, x, class)? {
                    push(e, &mut found);
                }
            }
        }
    }
    Ok(found)
}

/// The equilibrium of the rational model, preferring the interior branch.
pub fn solve_rational_equilibrium<S: Scalar>(
    base: &ModelParams<S>,
    vp: &VaccinationParams<S>,
) -> Result<VaccinationEquilibrium<S>> {
    solve_rational_equilibria(base, vp)?
        .into_iter()
        .next()
        .ok_or(Error::NonConvergence {
            what: "rational equilibrium (no consistent pattern)",
            iterations: 0,
            residual: f64::NAN,
        })
}

/// Interior Newton runs from a 3x3 grid of starts.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalAudit<S> {
    pub starts: usize,
    pub failed: usize,
    /// Converged points, one per successful start.
    pub roots: Vec<[S; 2]>,
}

impl<S: Scalar> RationalAudit<S> {
    /// Largest distance between any two converged points.
    pub fn spread(&self) -> S {
        let mut m = S::zero();
        for u in &self.roots {
            for w in &self.roots {
                m = m.max((u[0] - w[0]).abs().max((u[1] - w[1]).abs()));
            }
        }
        m
    }
}

pub fn rational_multistart<S: Scalar>(
    base: &ModelParams<S>,
    vp: &VaccinationParams<S>,
) -> RationalAudit<S> {
    let grid = [0.1, 0.5, 0.9].map(S::lit);
    let mut audit = RationalAudit {
        starts: 0,
        failed: 0,
        roots: Vec::new(),
    };
    for &a in &grid {
        for &v in &grid {
            audit.starts += 1;
            match interior_newton(base, vp, [a, v]) {
                Ok(x) => audit.roots.push(x),
                Err(_) => audit.failed += 1,
            }
        }
    }
    audit
}

/// Homophily derivative `(dx_a/dh, dx_v/dh)` of an interior equilibrium.
pub fn dh_rational<S: Scalar>(
    base: &ModelParams<S>,
    vp: &VaccinationParams<S>,
    eq: &VaccinationEquilibrium<S>,
) -> Result<[S; 2]> {
    if !eq.classification.is_interior() {
        return Err(Error::Precondition(format!(
            "homophily derivative needs an interior equilibrium, got {}",
            eq.classification.label()
        )));
    }
    let p = base.with_vaccination(eq.x_a, eq.x_v)?;
    let ss = match eq.induced {
        Some(ss) => ss,
        None => solve_steady_state(&p)?,
    };
    if !ss.is_interior() {
        return Err(Error::Precondition("induced steady state is not interior".into()));
    }
    let (dth, dh_th) = theta_derivatives(&p, &ss)?;
    let jx = Mat2::identity().sub(&dth.scale(vp.k));
    let jh = [-vp.k * dh_th[0], -vp.k * dh_th[1]];
    jx.solve([-jh[0], -jh[1]]).ok_or(Error::Singular {
        what: "rational equilibrium jacobian",
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theta_matches_ratio_form() {
        let p = ModelParams::<f64>::new(0.3, 0.4, 0.2, 0.1, 0.3, 0.1).unwrap();
        let ss = solve_steady_state(&p).unwrap();
        let th = theta(&p, &ss);
        assert!((th[0] - ss.state.rho_a / 0.9).abs() < 1e-13);
        assert!((th[1] - ss.state.rho_v / 0.7).abs() < 1e-13);
    }

    #[test]
    fn theta_derivatives_match_finite_differences() {
        let p = ModelParams::<f64>::new(0.3, 0.4, 0.2, 0.1, 0.3, 0.1).unwrap();
        let ss = solve_steady_state(&p).unwrap();
        let (dx, dh) = theta_derivatives(&p, &ss).unwrap();
        let e = 1e-6;
        let th = |p: ModelParams<f64>| theta(&p, &solve_steady_state(&p).unwrap());
        let fa = [th(p.with_vaccination(0.1 + e, 0.3).unwrap()), th(p.with_vaccination(0.1 - e, 0.3).unwrap())];
        let fh = [th(p.with_h(0.4 + e).unwrap()), th(p.with_h(0.4 - e).unwrap())];
        assert!(((fa[0][0] - fa[1][0]) / (2.0 * e) - dx.a).abs() < 1e-7);
        assert!(((fa[0][1] - fa[1][1]) / (2.0 * e) - dx.c).abs() < 1e-7);
        assert!(((fh[0][1] - fh[1][1]) / (2.0 * e) - dh[1]).abs() < 1e-7);
    }

    #[test]
    fn large_cost_density_pins_vaxxers_at_one() {
        let base = ModelParams::new(0.3, 0.4, 0.1, 0.0, 0.0, 0.1).unwrap();
        let vp = VaccinationParams::new(50.0, 0.0, 0.0).unwrap();
        let eq = solve_rational_equilibrium(&base, &vp).unwrap();
        assert!(eq.x_a >= 0.0 && eq.x_v <= 1.0);
        assert!(eq.residual < 1e-9);
    }
}
