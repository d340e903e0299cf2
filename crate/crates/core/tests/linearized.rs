mod common;

use common::{draw_supercritical, integrate_gk, rng};
use homophily_core::linearized::bonacich_series;
use homophily_core::model::{integrate_sis_at, jacobian_at};
use homophily_core::statics::{dh_slowest_eigenvalue, jacobian_partial};
use homophily_core::steady_state::solve_steady_state;
use homophily_core::{InfectionState, LinearizedSystem, Mat2, ModelParams, ParamId};
use proptest::prelude::*;

fn system(p: &ModelParams) -> LinearizedSystem {
    let ss = solve_steady_state(p).unwrap();
    LinearizedSystem::at(p, &ss).unwrap()
}

fn segregated() -> ModelParams {
    ModelParams::new(0.5, 1.0, 0.2, 0.2, 0.4, 0.1).unwrap()
}

/// Least-squares slope of `log |d(t)|` over `[50, 100]`.
fn fitted_decay(sys: &LinearizedSystem, d0: [f64; 2]) -> f64 {
    let pts: Vec<(f64, f64)> = (0..=100)
        .map(|i| {
            let t = 50.0 + 0.5 * i as f64;
            let d = sys.linear_trajectory(d0, t);
            (t, d[0].hypot(d[1]).ln())
        })
        .collect();
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    -sxy / sxx
}

#[test]
fn propagator_is_identity_at_zero() {
    let sys = system(&ModelParams::new(0.3, 0.5, 0.2, 0.1, 0.5, 0.2).unwrap());
    assert_eq!(sys.linear_trajectory([0.3, -0.7], 0.0), [0.3, -0.7]);
}

#[test]
fn segregated_groups_decay_at_their_own_rate() {
    let p = segregated();
    let sys = system(&p);
    for t in [0.5, 3.0, 17.0] {
        let d = sys.linear_trajectory([1e-3, 2e-3], t);
        assert!((d[0] - 1e-3 * (-0.6 * t).exp()).abs() < 1e-16);
        assert!((d[1] - 2e-3 * (-0.4 * t).exp()).abs() < 1e-16);
    }
    assert!((sys.convergence_rate() - 0.4).abs() < 1e-14);
}

#[test]
fn propagator_matches_matrix_ode() {
    let p = ModelParams::new(0.35, 0.6, 0.25, 0.1, 0.45, 0.3).unwrap();
    let sys = system(&p);
    let j = sys.jacobian;
    let mut y = Mat2::identity();
    let n = 20_000;
    let dt = 10.0 / n as f64;
    for _ in 0..n {
        let k1 = j.mul(&y);
        let k2 = j.mul(&y.add(&k1.scale(0.5 * dt)));
        let k3 = j.mul(&y.add(&k2.scale(0.5 * dt)));
        let k4 = j.mul(&y.add(&k3.scale(dt)));
        y = y.add(&k1.add(&k2.scale(2.0)).add(&k3.scale(2.0)).add(&k4).scale(dt / 6.0));
    }
    assert!(y.sub(&sys.propagator(10.0)).max_abs() < 1e-12);
}

#[test]
fn linearization_tracks_nonlinear_flow() {
    let mut r = rng(21);
    for _ in 0..20 {
        let p = draw_supercritical(&mut r);
        let ss = solve_steady_state(&p).unwrap();
        let sys = LinearizedSystem::at(&p, &ss).unwrap();
        let [ua, uv] = p.box_upper();
        let d0 = [
            (-1e-4f64).max(-ss.state.rho_a).min(ua - ss.state.rho_a),
            1e-4f64.min(uv - ss.state.rho_v),
        ];
        let start = InfectionState::new(ss.state.rho_a + d0[0], ss.state.rho_v + d0[1]);
        let stops: Vec<f64> = (1..=20).map(f64::from).collect();
        let traj = integrate_sis_at(&p, start, 20.0, 1e-12, &stops).unwrap();
        for (t, st) in traj.times.iter().zip(&traj.states) {
            let d = sys.linear_trajectory(d0, *t);
            assert!((st.rho_a - ss.state.rho_a - d[0]).abs() < 1e-6);
            assert!((st.rho_v - ss.state.rho_v - d[1]).abs() < 1e-6);
        }
    }
}

#[test]
fn cumulative_infection_matches_discounted_quadrature() {
    let mut r = rng(22);
    for _ in 0..30 {
        let p = draw_supercritical(&mut r);
        let sys = system(&p);
        for d0 in [[1.0, 1.0], [1.0, -0.5]] {
            let ci = sys.cumulative_infection(&p, d0).unwrap();
            let rate = p.r() + sys.convergence_rate();
            let horizon = 14.0 * std::f64::consts::LN_10 / rate;
            let oracle = |g: usize| {
                integrate_gk(
                    |t| p.r() * (-p.r() * t).exp() * sys.linear_trajectory(d0, t)[g],
                    0.0,
                    horizon,
                    1e-12,
                )
            };
            assert!((ci.ci_a - oracle(0)).abs() < 1e-8);
            assert!((ci.ci_v - oracle(1)).abs() < 1e-8);
            assert!((ci.total - (p.q() * ci.ci_a + (1.0 - p.q()) * ci.ci_v)).abs() < 1e-15);
        }
        let zero = sys.cumulative_infection(&p, [0.0, 0.0]).unwrap();
        assert_eq!((zero.ci_a, zero.ci_v), (0.0, 0.0));
    }
}

#[test]
fn segregated_cumulative_infection() {
    let p = segregated();
    let ci = system(&p).cumulative_infection(&p, [1.0, 1.0]).unwrap();
    assert!((ci.ci_a - 0.1 / 0.7).abs() < 1e-10);
    assert!((ci.ci_a - 0.142857).abs() < 1e-6);
    assert!((ci.ci_v - 0.1 / 0.5).abs() < 1e-10);
    assert!((ci.affine_total(0.5, 0.01) - (0.5 + 0.01 * ci.total)).abs() < 1e-16);
}

#[test]
fn bonacich_series_converges_to_resolvent() {
    let p = ModelParams::new(0.35, 0.6, 0.25, 0.1, 0.45, 3.0).unwrap();
    let sys = system(&p);
    assert!(-sys.eigenvalues.0 < p.r());
    let ci = sys.cumulative_infection(&p, [1.0, 1.0]).unwrap();
    let sum = bonacich_series(&sys.jacobian, p.r(), [1.0, 1.0], 1e-16, 10_000).unwrap();
    assert!((sum[0] - ci.ci_a).abs() < 1e-12 && (sum[1] - ci.ci_v).abs() < 1e-12);
}

#[test]
fn discrete_time_sum_equals_cumulative_infection() {
    let p = ModelParams::new(0.3, 0.4, 0.2, 0.15, 0.55, 0.25).unwrap();
    let sys = system(&p);
    let ci = sys.cumulative_infection(&p, [1.0, 1.0]).unwrap();
    for eps in [0.5, 0.1, 0.01] {
        let step = Mat2::identity().add(&sys.jacobian.scale(eps));
        let disc = 1.0 / (1.0 + p.r() * eps);
        let (mut d, mut w, mut sum): ([f64; 2], f64, [f64; 2]) = ([1.0, 1.0], p.r() * eps * disc, [0.0, 0.0]);
        while w * d[0].abs().max(d[1].abs()) > 1e-18 {
            sum = [sum[0] + w * d[0], sum[1] + w * d[1]];
            d = step.mul_vec(d);
            w *= disc;
        }
        assert!((sum[0] - ci.ci_a).abs() < 1e-10, "eps {eps}");
        assert!((sum[1] - ci.ci_v).abs() < 1e-10, "eps {eps}");
    }
}

#[test]
fn decay_fit_recovers_slowest_eigenvalue() {
    let mut r = rng(23);
    let mut checked = 0;
    while checked < 100 {
        let p = draw_supercritical(&mut r);
        let sys = system(&p);
        let (l1, l2) = sys.eigenvalues;
        if (l2 - l1) * 50.0 < 25.0 {
            continue;
        }
        let cr = sys.convergence_rate();
        let fit = fitted_decay(&sys, [1.0, 1.0]);
        assert!((fit - cr).abs() < 1e-3, "fit {fit} vs {cr}");
        assert!((fit - cr).abs() / cr < 1e-4, "fit {fit} vs {cr}");
        checked += 1;
    }
}

#[test]
fn discounted_rate_is_shifted() {
    let p = ModelParams::new(0.35, 0.6, 0.25, 0.1, 0.45, 0.3).unwrap();
    let sys = system(&p);
    assert!((sys.discounted_convergence_rate(p.r()) - (sys.convergence_rate() + p.r())).abs() < 1e-15);
}

fn slow_eigenvalue(p: &ModelParams, st: &InfectionState) -> f64 {
    jacobian_at(p, st).real_eigenvalues().unwrap().1
}

#[test]
fn slow_mode_falls_with_infection_levels() {
    let mut r = rng(24);
    for _ in 0..100 {
        let p = draw_supercritical(&mut r);
        let ss = solve_steady_state(&p).unwrap();
        let sys = LinearizedSystem::at(&p, &ss).unwrap();
        let st = ss.state;
        let e = 1e-6;
        for (which, dir) in [(ParamId::RhoA, [e, 0.0]), (ParamId::RhoV, [0.0, e])] {
            let an = sys.eigenvalue_sensitivity(&jacobian_partial(&p, &st, which));
            let plus = InfectionState::new(st.rho_a + dir[0], st.rho_v + dir[1]);
            let minus = InfectionState::new(st.rho_a - dir[0], st.rho_v - dir[1]);
            let fd = (slow_eigenvalue(&p, &plus) - slow_eigenvalue(&p, &minus)) / (2.0 * e);
            assert!(an < 0.0, "{which:?}: {an}");
            assert!((an - fd).abs() < 1e-6 * an.abs().max(1.0), "{which:?}: {an} vs {fd}");
        }
    }
}

/// Central difference in `h` of the slow eigenvalue at a frozen state.
fn slow_mode_dh(p: &ModelParams, st: &InfectionState) -> f64 {
    let e = 1e-5;
    let h = p.h();
    (slow_eigenvalue(&p.with_h(h + e).unwrap(), st) - slow_eigenvalue(&p.with_h(h - e).unwrap(), st))
        / (2.0 * e)
}

#[test]
fn homophily_slows_convergence_near_segregation() {
    let mut r = rng(25);
    for _ in 0..100 {
        let p = common::draw_both_endemic(&mut r, 1.0 - 1e-4);
        let ss = solve_steady_state(&p).unwrap();
        let sys = LinearizedSystem::at(&p, &ss).unwrap();
        let an = dh_slowest_eigenvalue(&p, &ss, &sys).unwrap().direct;
        let fd = slow_mode_dh(&p, &ss.state);
        assert!(an > 0.0 && fd > 0.0);
        assert!((an - fd).abs() < 1e-6 * an.abs().max(1.0));
        let sv = ss.susceptible.1;
        let limit = p.q() * (ss.state.rho_a - ss.state.rho_v) + p.q() * sv;
        assert!((an - limit).abs() < 1e-3, "{an} vs {limit}");
    }
}

#[test]
fn near_uniform_mixing_sign_flips_at_half_capacity() {
    let mut r = rng(26);
    for _ in 0..100 {
        let base = common::draw_both_endemic(&mut r, 1e-4);
        let x = base.aggregate_vaccination();
        let dx = base.x_v() - base.x_a();
        let q = base.q();
        let mid = 0.5 * (1.0 - x);
        for f in [0.8, 0.95, 1.05, 1.2] {
            let p = base.with_mu(f * mid).unwrap();
            let ss = solve_steady_state(&p).unwrap();
            let sys = LinearizedSystem::at(&p, &ss).unwrap();
            let an = dh_slowest_eigenvalue(&p, &ss, &sys).unwrap().direct;
            let fd = slow_mode_dh(&p, &ss.state);
            assert_eq!(an > 0.0, f > 1.0, "mu/mid {f}: {an}");
            assert_eq!(fd > 0.0, f > 1.0, "mu/mid {f}: {fd}");
            let limit = -q * (1.0 - q) * (1.0 - x - 2.0 * p.mu()) * dx * dx / (1.0 - x).powi(2);
            assert!((an - limit).abs() < 1e-3 * limit.abs() + 1e-5, "{an} vs {limit}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn resolvent_is_m_matrix(seed in any::<u64>()) {
        let p = draw_supercritical(&mut rng(seed));
        let sys = system(&p);
        let (l1, l2) = sys.eigenvalues;
        prop_assert!(l1 < l2 && l2 < 0.0);
        prop_assert!((sys.jacobian.trace() - (l1 + l2)).abs() < 1e-12);
        prop_assert!((sys.jacobian.det() - l1 * l2).abs() < 1e-12);
        let m = Mat2::identity().scale(p.r()).sub(&sys.jacobian);
        prop_assert!(m.b <= 0.0 && m.c <= 0.0 && m.det() > 0.0);
        let inv = m.inverse().unwrap();
        prop_assert!(inv.a >= 0.0 && inv.b >= 0.0 && inv.c >= 0.0 && inv.d >= 0.0);
        let ci = sys.cumulative_infection(&p, [1.0, 1.0]).unwrap();
        prop_assert!(ci.ci_a > 0.0 && ci.ci_v > 0.0);
    }

    #[test]
    fn slow_eigenvectors_are_positive(seed in any::<u64>()) {
        let p = draw_supercritical(&mut rng(seed));
        let sys = system(&p);
        let u = sys.slow_right;
        let v = sys.slow_left;
        prop_assert!(u[0] * u[1] >= 0.0 && v[0] * v[1] >= 0.0);
        prop_assert!(u[0] * v[0] + u[1] * v[1] != 0.0);
    }
}
