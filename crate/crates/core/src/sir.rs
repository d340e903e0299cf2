//! SIR variant: forward dynamics and final-size equations.

use crate::error::{Error, Result};
use crate::linalg::Mat2;
use crate::ode::{integrate, Flow, OdeOptions, OdeStats};
use crate::params::ModelParams;
use crate::Scalar;

/// Infected and removed shares; vaccinated agents count as removed.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SirState<S> {
    pub rho_a: S,
    pub rho_v: S,
    pub r_a: S,
    pub r_v: S,
}

impl<S: Scalar> SirState<S> {
    /// Initial condition with `seed` infected in each group.
    pub fn seeded(p: &ModelParams<S>, seed: S) -> Self {
        Self {
            rho_a: seed,
            rho_v: seed,
            r_a: p.x_a(),
            r_v: p.x_v(),
        }
    }

    fn to_array(self) -> [S; 4] {
        [self.rho_a, self.rho_v, self.r_a, self.r_v]
    }

    fn from_array(v: [S; 4]) -> Self {
        Self {
            rho_a: v[0],
            rho_v: v[1],
            r_a: v[2],
            r_v: v[3],
        }
    }
}

/// `rho_g' = rho~_g (1 - R_g - rho_g) - mu rho_g`, `R_g' = mu rho_g`.
pub fn rhs_sir<S: Scalar>(p: &ModelParams<S>, s: &SirState<S>) -> [S; 4] {
    let one = S::one();
    let (qa, qv) = p.meeting_rates();
    let ea = qa * s.rho_a + (one - qa) * s.rho_v;
    let ev = qv * s.rho_v + (one - qv) * s.rho_a;
    let mu = p.mu();
    [
        ea * (one - s.r_a - s.rho_a) - mu * s.rho_a,
        ev * (one - s.r_v - s.rho_v) - mu * s.rho_v,
        mu * s.rho_a,
        mu * s.rho_v,
    ]
}

/// Result of a forward SIR run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirRun<S> {
    pub final_state: SirState<S>,
    pub t_end: S,
    pub ci_a: S,
    pub ci_v: S,
    pub ci_total: S,
    pub stats: OdeStats,
}

/// Integrates from `seed` until total infection drops below `1e-12` after
/// the peak or `t = 1e4 / mu`.
pub fn integrate_sir<S: Scalar>(p: &ModelParams<S>, seed: S, tolerance: S) -> Result<SirRun<S>> {
    let init = SirState::seeded(p, seed);
    let mut opts = OdeOptions::with_tolerance(tolerance);
    opts.atol = tolerance * S::lit(1e-6);
    let floor = S::lit(1e-12);
    let horizon = S::lit(1e4) / p.mu();
    let (t_end, y, stats) = integrate(
        |y: &[S; 4]| rhs_sir(p, &SirState::from_array(*y)),
        S::zero(),
        init.to_array(),
        horizon,
        &[],
        &opts,
        |_, y| {
            let f = rhs_sir(p, &SirState::from_array(*y));
            let falling = f[0] + f[1] <= S::zero();
            Ok(if y[0] + y[1] < floor && falling {
                Flow::Stop
            } else {
                Flow::Continue
            })
        },
    )?;
    let fin = SirState::from_array(y);
    let ci_a = (fin.r_a - p.x_a()) / p.mu();
    let ci_v = (fin.r_v - p.x_v()) / p.mu();
    Ok(SirRun {
        final_state: fin,
        t_end,
        ci_a,
        ci_v,
        ci_total: p.q() * ci_a + (S::one() - p.q()) * ci_v,
        stats,
    })
}

/// Solution of the final-size equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinalSize<S> {
    /// Undiscounted cumulative infection per group.
    pub ci_a: S,
    pub ci_v: S,
    pub ci_total: S,
    /// Exposure-weighted cumulative infection `(CI~_a, CI~_v)`.
    pub exposure: (S, S),
    /// Final removed shares `R_g = x_g + mu CI_g`.
    pub r_a: S,
    pub r_v: S,
    pub seed: S,
    pub residual: S,
}

fn exposure<S: Scalar>(p: &ModelParams<S>, ci: [S; 2]) -> (S, S) {
    let one = S::one();
    let (qa, qv) = p.meeting_rates();
    (
        qa * ci[0] + (one - qa) * ci[1],
        (one - qv) * ci[0] + qv * ci[1],
    )
}

fn susceptible_pool<S: Scalar>(p: &ModelParams<S>, seed: S) -> [S; 2] {
    [S::one() - p.x_a() - seed, S::one() - p.x_v() - seed]
}

/// Right side `G_g = ((1 - x_g - s)(1 - exp(-CI~_g)) + s) / mu`.
fn final_size_map<S: Scalar>(p: &ModelParams<S>, seed: S, ci: [S; 2]) -> [S; 2] {
    let one = S::one();
    let (ea, ev) = exposure(p, ci);
    let pool = susceptible_pool(p, seed);
    [
        (pool[0] * (one - (-ea).exp()) + seed) / p.mu(),
        (pool[1] * (one - (-ev).exp()) + seed) / p.mu(),
    ]
}

fn e_diag<S: Scalar>(p: &ModelParams<S>, seed: S, ci: [S; 2]) -> [S; 2] {
    let (ea, ev) = exposure(p, ci);
    let pool = susceptible_pool(p, seed);
    [pool[0] * (-ea).exp() / p.mu(), pool[1] * (-ev).exp() / p.mu()]
}

fn meeting_matrix<S: Scalar>(p: &ModelParams<S>) -> Mat2<S> {
    let one = S::one();
    let (qa, qv) = p.meeting_rates();
    Mat2::new(qa, one - qa, one - qv, qv)
}

fn final_size_residual<S: Scalar>(p: &ModelParams<S>, seed: S, ci: [S; 2]) -> [S; 2] {
    let g = final_size_map(p, seed, ci);
    [g[0] - ci[0], g[1] - ci[1]]
}

fn newton<S: Scalar>(p: &ModelParams<S>, seed: S, start: [S; 2]) -> Option<[S; 2]> {
    let tol = S::lit(S::SOLVE_TOL);
    let q = meeting_matrix(p);
    let mut ci = start;
    for _ in 0..100 {
        let f = final_size_residual(p, seed, ci);
        let norm = f[0].abs().max(f[1].abs());
        if norm <= tol * (S::one() + ci[0].abs().max(ci[1].abs())) {
            return Some(ci);
        }
        let e = e_diag(p, seed, ci);
        let jac = Mat2::diag(e[0], e[1]).mul(&q).sub(&Mat2::identity());
        let step = jac.solve([-f[0], -f[1]])?;
        let mut alpha = S::one();
        let mut moved = false;
        for _ in 0..40 {
            let trial = [
                (ci[0] + alpha * step[0]).max(S::zero()),
                (ci[1] + alpha * step[1]).max(S::zero()),
            ];
            let ft = final_size_residual(p, seed, trial);
            if ft[0].abs().max(ft[1].abs()) < (S::one() - S::lit(1e-4) * alpha) * norm {
                ci = trial;
                moved = true;
                break;
            }
            alpha *= S::lit(0.5);
        }
        if !moved {
            let done = norm <= S::lit(S::SOLVE_TOL * 1e3);
            return done.then_some(ci);
        }
    }
    None
}

/// Monotone iteration of `G` from the upper bound `(1 - x_g) / mu`. It
/// decreases to the largest fixed point.
fn descend<S: Scalar>(p: &ModelParams<S>, seed: S) -> [S; 2] {
    let mut ci = [(S::one() - p.x_a()) / p.mu(), (S::one() - p.x_v()) / p.mu()];
    for _ in 0..1_000_000 {
        let next = final_size_map(p, seed, ci);
        let moved = (next[0] - ci[0]).abs().max((next[1] - ci[1]).abs());
        ci = next;
        if moved <= S::lit(S::SOLVE_TOL) {
            break;
        }
    }
    ci
}

fn assemble<S: Scalar>(p: &ModelParams<S>, seed: S, ci: [S; 2]) -> FinalSize<S> {
    let f = final_size_residual(p, seed, ci);
    FinalSize {
        ci_a: ci[0],
        ci_v: ci[1],
        ci_total: p.q() * ci[0] + (S::one() - p.q()) * ci[1],
        exposure: exposure(p, ci),
        r_a: p.x_a() + p.mu() * ci[0],
        r_v: p.x_v() + p.mu() * ci[1],
        seed,
        residual: f[0].abs().max(f[1].abs()),
    }
}

fn check_seed<S: Scalar>(p: &ModelParams<S>, seed: S) -> Result<()> {
    if seed >= S::zero() && seed < S::one() - p.x_a().max(p.x_v()) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "seed",
            value: seed.as_f64(),
            expected: "0 <= seed < 1 - max(x_a, x_v)",
        })
    }
}

/// Final size for infection seed `seed` (`0` is the vanishing-seed limit).
///
/// Newton is started from one forward integration; a monotone descent from
/// the upper bound is the fallback.
pub fn solve_final_size<S: Scalar>(p: &ModelParams<S>, seed: S) -> Result<FinalSize<S>> {
    check_seed(p, seed)?;
    let probe = if seed > S::zero() { seed } else { S::lit(1e-6) };
    let guess = integrate_sir(p, probe.min(S::lit(0.5) * (S::one() - p.x_a().max(p.x_v()))), S::lit(S::ODE_RTOL))
        .map(|run| [run.ci_a, run.ci_v])
        .ok();
    solve_final_size_from(p, seed, guess)
}

/// As [`solve_final_size`] with an explicit warm start.
pub fn solve_final_size_from<S: Scalar>(
    p: &ModelParams<S>,
    seed: S,
    guess: Option<[S; 2]>,
) -> Result<FinalSize<S>> {
    check_seed(p, seed)?;
    let trivial = |ci: &[S; 2]| seed == S::zero() && ci[0].max(ci[1]) <= S::lit(1e-9);
    if let Some(g) = guess {
        if let Some(ci) = newton(p, seed, g) {
            if !trivial(&ci) {
                return Ok(assemble(p, seed, ci));
            }
        }
    }
    let top = descend(p, seed);
    let ci = newton(p, seed, top).unwrap_or(top);
    let fs = assemble(p, seed, ci);
    if fs.residual <= S::lit(S::SOLVE_TOL * 1e4) {
        Ok(fs)
    } else {
        Err(Error::NonConvergence {
            what: "final-size equations",
            iterations: 100,
            residual: fs.residual.as_f64(),
        })
    }
}

/// Homophily sensitivity of total SIR cumulative infection.
///
/// `det` and `certificate` are reported in every regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SirHomophilySensitivity<S> {
    /// Implicit-function derivative; `None` outside `mu > 1 - x_a`.
    pub analytic: Option<S>,
    /// Central difference of the re-solved final size.
    pub finite_difference: S,
    /// `R_v - R_a`; its sign is the sign of `analytic` when `CI_a > CI_v`.
    pub certificate: S,
    pub delta_ci: S,
    /// `det(E^{-1} - Q)`.
    pub det: S,
    /// Whether `mu > 1 - x_a`, the regime where the derivative is known to
    /// be positive.
    pub regime_gate: bool,
}

/// `dCI/dh = mu q (1 - q) (e^{CI~_v}/(1 - x_v - s) - e^{CI~_a}/(1 - x_a - s))
/// (CI_a - CI_v) / det(E^{-1} - Q)`.
pub fn dh_ci_sir<S: Scalar>(p: &ModelParams<S>, fs: &FinalSize<S>) -> Result<SirHomophilySensitivity<S>> {
    let one = S::one();
    let q = p.q();
    let s = fs.seed;
    let ci = [fs.ci_a, fs.ci_v];
    let e = e_diag(p, s, ci);
    if e[0] <= S::zero() || e[1] <= S::zero() {
        return Err(Error::Singular {
            what: "final-size sensitivity (empty susceptible pool)",
        });
    }
    let m = Mat2::diag(e[0].recip(), e[1].recip()).sub(&meeting_matrix(p));
    let det = m.det();
    let pool = susceptible_pool(p, s);
    let delta_ci = fs.ci_a - fs.ci_v;
    let regime_gate = p.mu() > one - p.x_a();
    let formula = p.mu() * q * (one - q)
        * (fs.exposure.1.exp() / pool[1] - fs.exposure.0.exp() / pool[0])
        * delta_ci
        / det;

    let step = S::lit(S::FD_STEP);
    let lo = (p.h() - step).max(S::zero());
    let hi = (p.h() + step).min(one);
    let at = |h: S| -> Result<S> {
        let ph = p.with_h(h)?;
        Ok(solve_final_size_from(&ph, s, Some(ci))?.ci_total)
    };
    let finite_difference = (at(hi)? - at(lo)?) / (hi - lo);

    Ok(SirHomophilySensitivity {
        analytic: regime_gate.then_some(formula),
        finite_difference,
        certificate: fs.r_v - fs.r_a,
        delta_ci,
        det,
        regime_gate,
    })
}
