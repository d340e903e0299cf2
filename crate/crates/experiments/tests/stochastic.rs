use homophily_core::steady_state::epidemic_threshold;
use homophily_core::ModelParams;
use homophily_lab::{stochastic_cross_check, CrossCheckSpec};

fn spec(seed: u64) -> CrossCheckSpec {
    CrossCheckSpec {
        agents: 100_000,
        horizon: 150.0,
        replicates: 10,
        seed,
        initial: 0.05,
    }
}

#[test]
fn fully_vaccinated_population_stays_clean() {
    let p = ModelParams::new(0.4, 0.3, 0.2, 1.0, 1.0, 0.1).unwrap();
    let cc = stochastic_cross_check(&p, &spec(1)).unwrap();
    for r in &cc.replicates {
        assert_eq!(r.prevalence, [0.0, 0.0]);
        assert_eq!(r.events, 0);
    }
}

#[test]
fn supercritical_prevalence_matches_mean_field() {
    let p = ModelParams::new(0.4, 0.5, 0.3, 0.1, 0.4, 0.1).unwrap();
    assert!(p.mu() < epidemic_threshold(&p));
    let cc = stochastic_cross_check(&p, &spec(7)).unwrap();
    assert_eq!(cc.extinct, 0);
    assert_eq!(cc.agreeing(3.0), 10, "{cc:?}");
    for g in 0..2 {
        assert!((cc.mean[g] - cc.mean_field[g]).abs() < 0.02 * cc.mean_field[g]);
    }
}

#[test]
fn subcritical_outbreaks_die_out() {
    let base = ModelParams::new(0.4, 0.5, 0.3, 0.1, 0.4, 0.1).unwrap();
    let p = base.with_mu(1.2 * epidemic_threshold(&base)).unwrap();
    let cc = stochastic_cross_check(&p, &spec(3)).unwrap();
    assert!(cc.extinct >= 9, "{} of 10 extinct", cc.extinct);
}

#[test]
fn replicates_are_reproducible_and_distinct() {
    let p = ModelParams::new(0.5, 0.2, 0.25, 0.0, 0.3, 0.1).unwrap();
    let mut s = spec(11);
    s.agents = 2000;
    s.horizon = 40.0;
    s.replicates = 4;
    let a = stochastic_cross_check(&p, &s).unwrap();
    let b = stochastic_cross_check(&p, &s).unwrap();
    assert_eq!(a, b);
    assert_ne!(a.replicates[0].events, a.replicates[1].events);
}

#[test]
fn small_populations_are_rejected() {
    let p = ModelParams::new(0.5, 0.2, 0.25, 0.0, 0.3, 0.1).unwrap();
    let mut s = spec(1);
    s.agents = 999;
    assert!(stochastic_cross_check(&p, &s).is_err());
}
