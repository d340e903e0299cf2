//! Event-driven simulation of the finite-population SIS chain.
//!
//! Agents within a group are exchangeable, so the chain is simulated on
//! infected counts: a susceptible in group `g` is infected at rate
//! `rho~_g` computed from the current counts, an infected agent recovers at
//! rate `mu`.

use anyhow::{bail, Result};
use homophily_core::steady_state::solve_steady_state;
use homophily_core::ModelParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrossCheckSpec {
    /// Population size, split `q : 1 - q`.
    pub agents: usize,
    pub horizon: f64,
    pub replicates: usize,
    pub seed: u64,
    /// Initial infected share of each group's unvaccinated agents.
    pub initial: f64,
}

impl Default for CrossCheckSpec {
    fn default() -> Self {
        Self {
            agents: 100_000,
            horizon: 200.0,
            replicates: 10,
            seed: 1,
            initial: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Replicate {
    /// Time-averaged prevalence over the second half of the horizon.
    pub prevalence: [f64; 2],
    /// Binomial standard error `sqrt(p (1 - p) / N_g)` per group.
    pub standard_error: [f64; 2],
    pub extinction_time: Option<f64>,
    pub events: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossCheck {
    pub group_sizes: [usize; 2],
    pub replicates: Vec<Replicate>,
    pub mean: [f64; 2],
    pub extinct: usize,
    /// Mean-field steady state `(rho_a, rho_v)`.
    pub mean_field: [f64; 2],
}

impl CrossCheck {
    /// Replicates whose prevalence lies within `z` standard errors of the
    /// mean-field value in both groups.
    pub fn agreeing(&self, z: f64) -> usize {
        self.replicates
            .iter()
            .filter(|r| (0..2).all(|g| (r.prevalence[g] - self.mean_field[g]).abs() <= z * r.standard_error[g]))
            .count()
    }
}

pub fn stochastic_cross_check(p: &ModelParams, spec: &CrossCheckSpec) -> Result<CrossCheck> {
    if spec.agents < 1000 {
        bail!("cross-check needs at least 1000 agents, got {}", spec.agents);
    }
    let n_a = (p.q() * spec.agents as f64).round() as usize;
    let sizes = [n_a, spec.agents - n_a];
    if sizes.contains(&0) {
        bail!("both groups need agents; got sizes {sizes:?}");
    }
    let ss = solve_steady_state(p)?;
    let replicates: Vec<Replicate> = (0..spec.replicates)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(i as u64);
            simulate(p, sizes, spec, &mut rng)
        })
        .collect();
    let m = replicates.len().max(1) as f64;
    let mean = [0, 1].map(|g| replicates.iter().map(|r| r.prevalence[g]).sum::<f64>() / m);
    Ok(CrossCheck {
        group_sizes: sizes,
        extinct: replicates.iter().filter(|r| r.extinction_time.is_some()).count(),
        replicates,
        mean,
        mean_field: ss.state.to_array(),
    })
}

fn simulate(p: &ModelParams, sizes: [usize; 2], spec: &CrossCheckSpec, rng: &mut ChaCha8Rng) -> Replicate {
    let (qa, qv) = p.meeting_rates();
    let mu = p.mu();
    let n = sizes.map(|s| s as f64);
    let vaccinated = [
        (p.x_a() * n[0]).round() as i64,
        (p.x_v() * n[1]).round() as i64,
    ];
    let pool = [sizes[0] as i64 - vaccinated[0], sizes[1] as i64 - vaccinated[1]];
    let mut infected = pool.map(|s| (spec.initial * s as f64).round() as i64);
    for g in 0..2 {
        if pool[g] > 0 && infected[g] == 0 {
            infected[g] = 1;
        }
    }

    let t_avg = 0.5 * spec.horizon;
    let mut area = [0.0f64; 2];
    let mut t = 0.0;
    let mut events = 0u64;
    let mut extinction_time = None;
    loop {
        let rho = [infected[0] as f64 / n[0], infected[1] as f64 / n[1]];
        let expo = [qa * rho[0] + (1.0 - qa) * rho[1], qv * rho[1] + (1.0 - qv) * rho[0]];
        let rates = [
            (pool[0] - infected[0]) as f64 * expo[0],
            (pool[1] - infected[1]) as f64 * expo[1],
            mu * infected[0] as f64,
            mu * infected[1] as f64,
        ];
        let total: f64 = rates.iter().sum();
        let dt = if total > 0.0 {
            -(1.0 - rng.gen::<f64>()).ln() / total
        } else {
            f64::INFINITY
        };
        let next = (t + dt).min(spec.horizon);
        if next > t_avg {
            let span = next - t.max(t_avg);
            for g in 0..2 {
                area[g] += infected[g] as f64 * span;
            }
        }
        if total == 0.0 && extinction_time.is_none() {
            extinction_time = Some(t);
        }
        if t + dt >= spec.horizon {
            break;
        }
        t += dt;
        events += 1;
        let mut pick = rng.gen::<f64>() * total;
        let mut which = rates.iter().rposition(|r| *r > 0.0).unwrap_or(0);
        for (i, r) in rates.iter().enumerate() {
            if pick < *r {
                which = i;
                break;
            }
            pick -= r;
        }
        match which {
            0 | 1 => infected[which] += 1,
            _ => infected[which - 2] -= 1,
        }
    }
    let window = spec.horizon - t_avg;
    let prevalence = [area[0] / (window * n[0]), area[1] / (window * n[1])];
    Replicate {
        prevalence,
        standard_error: [0, 1].map(|g| (prevalence[g] * (1.0 - prevalence[g]) / n[g]).sqrt()),
        extinction_time,
        events,
    }
}
