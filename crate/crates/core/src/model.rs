//! Mean-field SIS dynamics, their Jacobian and forward integration.

use crate::error::Result;
use crate::linalg::Mat2;
use crate::ode::{integrate, Flow, OdeOptions, OdeStats};
use crate::params::{InfectionState, ModelParams};
use crate::Scalar;

/// Right-hand side `rho_g' = S_g rho~_g - mu rho_g`.
pub fn rhs_sis<S: Scalar>(p: &ModelParams<S>, st: &InfectionState<S>) -> [S; 2] {
    let (sa, sv) = st.susceptible(p);
    let (ea, ev) = st.exposure(p);
    [sa * ea - p.mu() * st.rho_a, sv * ev - p.mu() * st.rho_v]
}

/// Jacobian of [`rhs_sis`] at `st`.
pub fn jacobian_at<S: Scalar>(p: &ModelParams<S>, st: &InfectionState<S>) -> Mat2<S> {
    let one = S::one();
    let (qa, qv) = p.meeting_rates();
    let (sa, sv) = st.susceptible(p);
    let (ea, ev) = st.exposure(p);
    Mat2::new(
        -ea - p.mu() + sa * qa,
        (one - qa) * sa,
        (one - qv) * sv,
        -ev - p.mu() + sv * qv,
    )
}

/// Sampled solution of the SIS system.
#[derive(Debug, Clone)]
pub struct Trajectory<S> {
    pub times: Vec<S>,
    pub states: Vec<InfectionState<S>>,
    pub tolerance: S,
    pub stats: OdeStats,
    /// Largest box violation removed by clamping.
    pub max_clamp: S,
}

impl<S: Scalar> Trajectory<S> {
    pub fn last(&self) -> InfectionState<S> {
        *self.states.last().expect("trajectory holds the initial state")
    }
}

/// Integrates the SIS system from `initial` over `[0, horizon]`.
///
/// Every accepted step is recorded. Overshoot outside the feasible box up to
/// `10 * tolerance` is clamped; anything larger is an error.
pub fn integrate_sis<S: Scalar>(
    p: &ModelParams<S>,
    initial: InfectionState<S>,
    horizon: S,
    tolerance: S,
) -> Result<Trajectory<S>> {
    integrate_sis_at(p, initial, horizon, tolerance, &[])
}

/// As [`integrate_sis`], additionally landing exactly on each time in `stops`.
pub fn integrate_sis_at<S: Scalar>(
    p: &ModelParams<S>,
    initial: InfectionState<S>,
    horizon: S,
    tolerance: S,
    stops: &[S],
) -> Result<Trajectory<S>> {
    initial.check(p, S::zero())?;
    let slack = tolerance * S::lit(10.0);
    let opts = OdeOptions::with_tolerance(tolerance);
    let mut times = vec![S::zero()];
    let mut states = vec![initial];
    let mut max_clamp = S::zero();
    let (_, _, stats) = integrate(
        |y: &[S; 2]| rhs_sis(p, &InfectionState::from_array(*y)),
        S::zero(),
        initial.to_array(),
        horizon,
        stops,
        &opts,
        |t, y| {
            let st = InfectionState::from_array(*y);
            st.check(p, slack)?;
            max_clamp = max_clamp.max(st.box_violation(p));
            let st = st.clamped(p);
            *y = st.to_array();
            times.push(t);
            states.push(st);
            Ok(Flow::Continue)
        },
    )?;
    Ok(Trajectory {
        times,
        states,
        tolerance,
        stats,
        max_clamp,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams<f64> {
        ModelParams::new(0.3, 0.4, 0.25, 0.1, 0.5, 0.2).unwrap()
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let p = params();
        let st = InfectionState::new(0.3, 0.15);
        let j = jacobian_at(&p, &st);
        let e = 1e-6;
        let fd = |da: f64, dv: f64| {
            let plus = rhs_sis(&p, &InfectionState::new(st.rho_a + da, st.rho_v + dv));
            let minus = rhs_sis(&p, &InfectionState::new(st.rho_a - da, st.rho_v - dv));
            [(plus[0] - minus[0]) / (2.0 * e), (plus[1] - minus[1]) / (2.0 * e)]
        };
        let col_a = fd(e, 0.0);
        let col_v = fd(0.0, e);
        assert!((j.a - col_a[0]).abs() < 1e-8);
        assert!((j.c - col_a[1]).abs() < 1e-8);
        assert!((j.b - col_v[0]).abs() < 1e-8);
        assert!((j.d - col_v[1]).abs() < 1e-8);
    }

    #[test]
    fn zero_state_is_fixed() {
        let p = params();
        let t = integrate_sis(&p, InfectionState::new(0.0, 0.0), 10.0, 1e-10).unwrap();
        assert_eq!(t.last(), InfectionState::new(0.0, 0.0));
    }

    #[test]
    fn rejects_infeasible_initial_state() {
        let p = params();
        assert!(integrate_sis(&p, InfectionState::new(0.95, 0.1), 1.0, 1e-10).is_err());
    }

    #[test]
    fn runs_in_single_precision() {
        let p = ModelParams::<f32>::new(0.3, 0.4, 0.25, 0.1, 0.5, 0.2).unwrap();
        let t = integrate_sis(&p, InfectionState::new(0.1, 0.1), 50.0, 1e-5).unwrap();
        assert!(t.last().rho_a > 0.0);
    }
}
