use super::VaccinationParams;
use crate::error::Result;
use crate::linearized::LinearizedSystem;
use crate::params::ModelParams;
use crate::steady_state::solve_steady_state;
use crate::Scalar;

/// Welfare at given vaccination rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelfareReport<S> {
    /// `-(q (x_a + d)^2 + (1 - q) x_v^2) / 2 - rho`.
    pub w: S,
    /// `w - b CI`.
    pub w_congestion: S,
    /// Welfare obtained by integrating vaccination costs over the cost
    /// distribution.
    pub w_utilitarian: S,
    pub rho: S,
    pub ci_total: S,
    /// Planner optimum `min(k, 1 - mu)` of the homogeneous benchmark.
    pub x_star: S,
    /// `x_star - x`.
    pub decentralized_gap: S,
}

/// Welfare of the economy `p` (vaccination rates taken from `p`), with
/// cumulative infection computed for the shock `d0`.
pub fn welfare<S: Scalar>(
    p: &ModelParams<S>,
    vp: &VaccinationParams<S>,
    d0: [S; 2],
) -> Result<WelfareReport<S>> {
    let half = S::lit(0.5);
    let q = p.q();
    let ss = solve_steady_state(p)?;
    let rho = ss.rho(p);
    let sys = LinearizedSystem::at(p, &ss)?;
    let ci = sys.cumulative_infection(p, d0)?;
    let xa_d = p.x_a() + vp.d;
    let w = -half * (q * xa_d * xa_d + (S::one() - q) * p.x_v() * p.x_v()) - rho;
    let x_star = vp.k.min(S::one() - p.mu());
    Ok(WelfareReport {
        w,
        w_congestion: w - vp.b * ci.total,
        w_utilitarian: utilitarian_welfare(p, vp, ss.state.rho_a, ss.state.rho_v),
        rho,
        ci_total: ci.total,
        x_star,
        decentralized_gap: x_star - p.aggregate_vaccination(),
    })
}

/// `-q ((x_a + d)^2 - d^2) / (2k) - (1 - q) x_v^2 / (2k) - rho`: vaccination
/// costs of the agents with cost below their group's cutoff, plus infection
/// losses of the rest.
pub fn utilitarian_welfare<S: Scalar>(
    p: &ModelParams<S>,
    vp: &VaccinationParams<S>,
    rho_a: S,
    rho_v: S,
) -> S {
    let q = p.q();
    let two_k = S::lit(2.0) * vp.k;
    let xa_d = p.x_a() + vp.d;
    -q * (xa_d * xa_d - vp.d * vp.d) / two_k
        - (S::one() - q) * p.x_v() * p.x_v() / two_k
        - (q * rho_a + (S::one() - q) * rho_v)
}

/// Homogeneous planner objective `-x^2 / (2k) - max(1 - x - mu, 0)`.
pub fn planner_welfare<S: Scalar>(k: S, mu: S, x: S) -> S {
    -x * x / (S::lit(2.0) * k) - (S::one() - x - mu).max(S::zero())
}

/// Decentralized homogeneous equilibrium, the root of
/// `x (1 - x) = k (1 - x - mu)` in `[0, 1 - mu)`.
pub fn decentralized_homogeneous<S: Scalar>(k: S, mu: S) -> S {
    let one = S::one();
    if mu >= one {
        return S::zero();
    }
    let b = one + k;
    let c = k * (one - mu);
    // Smaller root, written to avoid cancellation.
    S::lit(2.0) * c / (b + (b * b - S::lit(4.0) * c).max(S::zero()).sqrt())
}

/// Planner optimum against the decentralized outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimalVaccination<S> {
    pub x_star: S,
    pub welfare_star: S,
    pub decentralized: S,
    pub welfare_decentralized: S,
    /// `(x, W(x))` on a uniform grid over `[0, 1]`.
    pub curve: Vec<(S, S)>,
}

pub fn optimal_vaccination<S: Scalar>(k: S, mu: S, grid: usize) -> OptimalVaccination<S> {
    let x_star = k.min((S::one() - mu).max(S::zero()));
    let dec = decentralized_homogeneous(k, mu);
    let n = grid.max(1);
    let curve = (0..=n)
        .map(|i| {
            let x = S::lit(i as f64 / n as f64);
            (x, planner_welfare(k, mu, x))
        })
        .collect();
    OptimalVaccination {
        x_star,
        welfare_star: planner_welfare(k, mu, x_star),
        decentralized: dec,
        welfare_decentralized: planner_welfare(k, mu, dec),
        curve,
    }
}
