//! Epidemic threshold and endemic steady states.

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::model::{jacobian_at, rhs_sis};
use crate::params::{InfectionState, ModelParams};
use crate::Scalar;

/// Recovery rates within this distance below the threshold are treated as
/// disease-free.
pub const THRESHOLD_BAND: f64 = 1e-8;

const MAX_NEWTON: usize = 100;
const MAX_FIXED_POINT: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SteadyKind {
    /// Both groups endemic.
    Interior,
    /// Exactly one group endemic. Only reachable when the groups are
    /// decoupled (`h = 1`) or one group is fully vaccinated.
    PartiallyEndemic,
    DiseaseFree,
}

/// A steady state together with the quantities the analysis reuses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState<S> {
    pub state: InfectionState<S>,
    pub susceptible: (S, S),
    pub exposure: (S, S),
    pub kind: SteadyKind,
    /// Epidemic threshold `mu_hat` of the parameters.
    pub threshold: S,
    /// Max-norm of the dynamics at `state`.
    pub residual: S,
    pub iterations: usize,
}

impl<S: Scalar> SteadyState<S> {
    fn assemble(
        p: &ModelParams<S>,
        state: InfectionState<S>,
        threshold: S,
        iterations: usize,
        disease_free: bool,
    ) -> Self {
        let f = rhs_sis(p, &state);
        let kind = if disease_free || (state.rho_a <= S::zero() && state.rho_v <= S::zero()) {
            SteadyKind::DiseaseFree
        } else if state.rho_a > S::zero() && state.rho_v > S::zero() {
            SteadyKind::Interior
        } else {
            SteadyKind::PartiallyEndemic
        };
        Self {
            state,
            susceptible: state.susceptible(p),
            exposure: state.exposure(p),
            kind,
            threshold,
            residual: f[0].abs().max(f[1].abs()),
            iterations,
        }
    }

    pub fn rho(&self, p: &ModelParams<S>) -> S {
        self.state.aggregate(p)
    }

    pub fn is_interior(&self) -> bool {
        self.kind == SteadyKind::Interior
    }
}

/// Epidemic threshold `mu_hat = (T + sqrt(T^2 - 4 h (1 - x_a)(1 - x_v))) / 2`
/// with `T = q~_a (1 - x_a) + q~_v (1 - x_v)`.
pub fn epidemic_threshold<S: Scalar>(p: &ModelParams<S>) -> S {
    let one = S::one();
    let (qa, qv) = p.meeting_rates();
    let (ua, uv) = (one - p.x_a(), one - p.x_v());
    let t = qa * ua + qv * uv;
    let disc = (t * t - S::lit(4.0) * p.h() * ua * uv).max(S::zero());
    S::lit(0.5) * (t + disc.sqrt())
}

/// Closed-form steady state at `h = 0` or `h = 1`; `None` otherwise.
pub fn closed_form_steady_state<S: Scalar>(p: &ModelParams<S>) -> Option<InfectionState<S>> {
    let (zero, one) = (S::zero(), S::one());
    if p.h() == zero {
        let x = p.aggregate_vaccination();
        let rho = (one - x - p.mu()).max(zero);
        if rho == zero {
            return Some(InfectionState::default());
        }
        let scale = rho / (one - x);
        Some(InfectionState::new(
            (one - p.x_a()) * scale,
            (one - p.x_v()) * scale,
        ))
    } else if p.h() == one {
        Some(InfectionState::new(
            (one - p.x_a() - p.mu()).max(zero),
            (one - p.x_v() - p.mu()).max(zero),
        ))
    } else {
        None
    }
}

fn max_abs<S: Scalar>(v: [S; 2]) -> S {
    v[0].abs().max(v[1].abs())
}

fn accept_tol<S: Scalar>() -> S {
    S::lit(S::SOLVE_TOL * 1e3)
}

/// Residual and Jacobian of the dynamics, optionally deflated by
/// `m(rho) = 1 / |rho|^2 + 1` so that the disease-free root repels Newton.
fn residual_system<S: Scalar>(
    p: &ModelParams<S>,
    x: &InfectionState<S>,
    deflate: bool,
) -> ([S; 2], Mat2<S>) {
    let f = rhs_sis(p, x);
    let j = jacobian_at(p, x);
    if !deflate {
        return (f, j);
    }
    let n2 = x.rho_a * x.rho_a + x.rho_v * x.rho_v;
    let m = n2.recip() + S::one();
    let g = -S::lit(2.0) / (n2 * n2);
    let (ga, gv) = (g * x.rho_a, g * x.rho_v);
    let jd = Mat2::new(
        m * j.a + f[0] * ga,
        m * j.b + f[0] * gv,
        m * j.c + f[1] * ga,
        m * j.d + f[1] * gv,
    );
    ([m * f[0], m * f[1]], jd)
}

/// Largest step fraction in `(0, 1]` that keeps the iterate at least 1% of
/// the way from each face of the box.
fn fraction_to_boundary<S: Scalar>(p: &ModelParams<S>, x: &InfectionState<S>, step: [S; 2]) -> S {
    let tau = S::lit(0.99);
    let upper = p.box_upper();
    let mut alpha = S::one();
    for (i, v) in x.to_array().into_iter().enumerate() {
        let s = step[i];
        if s < S::zero() && v > S::zero() {
            alpha = alpha.min(tau * v / -s);
        } else if s > S::zero() && upper[i] > v {
            alpha = alpha.min(tau * (upper[i] - v) / s);
        }
    }
    alpha
}

/// Damped Newton with projection onto the feasible box. With `deflate`, the
/// iterate is kept away from the origin.
fn newton<S: Scalar>(
    p: &ModelParams<S>,
    start: InfectionState<S>,
    deflate: bool,
) -> Result<(InfectionState<S>, usize)> {
    let tol = S::lit(S::SOLVE_TOL);
    let floor = S::lit(1e-12);
    let project = |s: InfectionState<S>| {
        let c = s.clamped(p);
        if deflate && c.rho_a.max(c.rho_v) < floor {
            InfectionState::new(c.rho_a.max(floor), c.rho_v.max(floor))
        } else {
            c
        }
    };
    let mut x = project(start);
    let (mut f, mut j) = residual_system(p, &x, deflate);
    let mut norm = max_abs(f);
    let mut rescues = 0;
    for it in 0..MAX_NEWTON {
        let plain = max_abs(rhs_sis(p, &x));
        if plain <= tol {
            return Ok((x, it));
        }
        let step = j.solve([-f[0], -f[1]]).ok_or(Error::Singular {
            what: "steady-state Newton step",
        })?;
        let mut alpha = fraction_to_boundary(p, &x, step);
        let mut accepted = false;
        while alpha > S::lit(1e-10) {
            let trial = project(InfectionState::new(
                x.rho_a + alpha * step[0],
                x.rho_v + alpha * step[1],
            ));
            let (ft, jt) = residual_system(p, &trial, deflate);
            let nt = max_abs(ft);
            if nt <= (S::one() - S::lit(1e-4) * alpha) * norm {
                x = trial;
                f = ft;
                j = jt;
                norm = nt;
                accepted = true;
                break;
            }
            alpha *= S::lit(0.5);
        }
        if !accepted {
            // Stalled on a face: a few positive fixed-point sweeps move the
            // iterate back inside before Newton resumes.
            if !deflate || rescues == MAX_RESCUES {
                break;
            }
            rescues += 1;
            x = project(fixed_point_sweeps(p, x, 8));
            let (fr, jr) = residual_system(p, &x, deflate);
            f = fr;
            j = jr;
            norm = max_abs(f);
        }
    }
    let plain = max_abs(rhs_sis(p, &x));
    if plain <= accept_tol() {
        Ok((x, MAX_NEWTON))
    } else {
        Err(Error::NonConvergence {
            what: "steady-state Newton",
            iterations: MAX_NEWTON,
            residual: plain.as_f64(),
        })
    }
}

const MAX_RESCUES: usize = 10;

fn fixed_point_sweeps<S: Scalar>(
    p: &ModelParams<S>,
    mut x: InfectionState<S>,
    sweeps: usize,
) -> InfectionState<S> {
    let [ua, uv] = p.box_upper();
    for _ in 0..sweeps {
        let (ea, ev) = x.exposure(p);
        x = InfectionState::new(ua * ea / (ea + p.mu()), uv * ev / (ev + p.mu()));
    }
    x
}

/// Monotone iteration `rho_g <- (1 - x_g) rho~_g / (rho~_g + mu)` from the top
/// of the box. It decreases to the largest fixed point.
fn descend_from_top<S: Scalar>(p: &ModelParams<S>) -> InfectionState<S> {
    let [ua, uv] = p.box_upper();
    let mut x = InfectionState::new(ua, uv);
    for _ in 0..MAX_FIXED_POINT {
        let (ea, ev) = x.exposure(p);
        let next = InfectionState::new(ua * ea / (ea + p.mu()), uv * ev / (ev + p.mu()));
        let moved = (next.rho_a - x.rho_a).abs().max((next.rho_v - x.rho_v).abs());
        x = next;
        if moved <= S::lit(S::SOLVE_TOL) {
            break;
        }
    }
    x
}

fn is_trivial<S: Scalar>(x: &InfectionState<S>) -> bool {
    x.rho_a.max(x.rho_v) <= S::lit(1e-9)
}

/// Steady state reached from generic positive initial conditions.
///
/// Closed forms are used at `h = 0` and `h = 1`; otherwise damped Newton is
/// started from the `h = 0` closed form, with a monotone descent from the top
/// of the box as fallback.
pub fn solve_steady_state<S: Scalar>(p: &ModelParams<S>) -> Result<SteadyState<S>> {
    solve_steady_state_from(p, None)
}

/// As [`solve_steady_state`], with an optional warm start for continuation.
pub fn solve_steady_state_from<S: Scalar>(
    p: &ModelParams<S>,
    guess: Option<InfectionState<S>>,
) -> Result<SteadyState<S>> {
    let threshold = epidemic_threshold(p);
    if p.mu() >= threshold - S::lit(THRESHOLD_BAND) {
        return Ok(SteadyState::assemble(
            p,
            InfectionState::default(),
            threshold,
            0,
            true,
        ));
    }
    if let Some(st) = closed_form_steady_state(p) {
        return Ok(SteadyState::assemble(p, st, threshold, 0, false));
    }
    let start = guess.unwrap_or_else(|| {
        let h0 = p.with_h(S::zero()).expect("h = 0 is valid");
        closed_form_steady_state(&h0).unwrap_or_default()
    });
    let start = if is_trivial(&start) {
        InfectionState::from_array(p.box_upper())
    } else {
        start
    };
    if let Ok((x, it)) = newton(p, start, true) {
        if !is_trivial(&x) {
            return Ok(SteadyState::assemble(p, x, threshold, it, false));
        }
    }
    let top = descend_from_top(p);
    let (x, it) = newton(p, top, true)?;
    if is_trivial(&x) {
        return Err(Error::NonConvergence {
            what: "steady state (only the disease-free root found)",
            iterations: it,
            residual: max_abs(rhs_sis(p, &x)).as_f64(),
        });
    }
    Ok(SteadyState::assemble(p, x, threshold, it, false))
}

/// Outcome of a multi-start uniqueness check.
#[derive(Debug, Clone, PartialEq)]
pub struct UniquenessAudit<S> {
    /// Distinct non-trivial roots found.
    pub roots: Vec<InfectionState<S>>,
    pub starts: usize,
    /// Starts that ended at the disease-free root.
    pub trivial: usize,
    /// Starts where both Newton and the fixed-point retry failed.
    pub failed: usize,
}

impl<S> UniquenessAudit<S> {
    pub fn is_unique(&self) -> bool {
        self.roots.len() <= 1
    }
}

/// Runs deflated Newton from a 4x4 grid of interior starts and collects the
/// roots. A start where Newton fails is retried through the positive
/// fixed-point map followed by a plain Newton polish.
pub fn uniqueness_audit<S: Scalar>(p: &ModelParams<S>) -> UniquenessAudit<S> {
    let [ua, uv] = p.box_upper();
    let fr = [0.2, 0.4, 0.6, 0.8].map(S::lit);
    let mut audit = UniquenessAudit {
        roots: Vec::new(),
        starts: 0,
        trivial: 0,
        failed: 0,
    };
    for &fa in &fr {
        for &fv in &fr {
            audit.starts += 1;
            let start = InfectionState::new(fa * ua, fv * uv);
            let attempt = newton(p, start, true).or_else(|_| {
                newton(p, fixed_point_sweeps(p, start, MAX_FIXED_POINT), false)
            });
            match attempt {
                Ok((x, _)) if is_trivial(&x) => audit.trivial += 1,
                Ok((x, _)) => {
                    let known = audit.roots.iter().any(|r: &InfectionState<S>| {
                        (r.rho_a - x.rho_a).abs().max((r.rho_v - x.rho_v).abs()) <= S::lit(1e-8)
                    });
                    if !known {
                        audit.roots.push(x);
                    }
                }
                Err(_) => audit.failed += 1,
            }
        }
    }
    audit
}

/// Eigenvalues of the Jacobian at a steady state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stability<S> {
    pub jacobian: Mat2<S>,
    /// `(lambda_1, lambda_2)`, ascending. Always real: off-diagonals are
    /// non-negative.
    pub eigenvalues: (S, S),
}

impl<S: Scalar> Stability<S> {
    pub fn is_stable(&self) -> bool {
        self.eigenvalues.1 < S::zero()
    }
}

pub fn classify_stability<S: Scalar>(p: &ModelParams<S>, ss: &SteadyState<S>) -> Stability<S> {
    let jacobian = jacobian_at(p, &ss.state);
    let eigenvalues = jacobian
        .real_eigenvalues()
        .unwrap_or((S::nan(), S::nan()));
    Stability {
        jacobian,
        eigenvalues,
    }
}
