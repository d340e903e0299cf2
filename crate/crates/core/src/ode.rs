//! Adaptive Dormand-Prince 5(4) integrator for small autonomous systems.

use crate::error::{Error, Result};
use crate::Scalar;

/// Step-control settings.
#[derive(Debug, Clone, Copy)]
pub struct OdeOptions<S> {
    pub rtol: S,
    pub atol: S,
    pub initial_step: S,
    pub max_step: S,
    pub max_steps: usize,
}

impl<S: Scalar> OdeOptions<S> {
    /// Tolerance `rtol` with `atol = rtol * 1e-4`.
    pub fn with_tolerance(rtol: S) -> Self {
        Self {
            rtol,
            atol: rtol * S::lit(1e-4),
            initial_step: S::lit(1e-3),
            max_step: S::lit(1.0),
            max_steps: 5_000_000,
        }
    }
}

impl<S: Scalar> Default for OdeOptions<S> {
    fn default() -> Self {
        Self::with_tolerance(S::lit(S::ODE_RTOL))
    }
}

/// Per-run counters.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// Control returned by the per-step observer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    Stop,
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth-order minus embedded fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<S: Scalar, const N: usize>(y: &[S; N], terms: &[(f64, &[S; N])], h: S) -> [S; N] {
    let mut out = *y;
    for (c, k) in terms {
        let c = S::lit(*c) * h;
        for i in 0..N {
            out[i] += c * k[i];
        }
    }
    out
}

/// Integrates `y' = f(y)` from `t0` to `t_end`.
///
/// `observe(t, y)` is called after every accepted step and at `t_end`; it can
/// modify `y` in place (for projection) and stop the run early. Output times
/// in `stops` are hit exactly. Returns the final time and state.
pub fn integrate<S, const N: usize, F, O>(
    mut f: F,
    t0: S,
    y0: [S; N],
    t_end: S,
    stops: &[S],
    opts: &OdeOptions<S>,
    mut observe: O,
) -> Result<(S, [S; N], OdeStats)>
where
    S: Scalar,
    F: FnMut(&[S; N]) -> [S; N],
    O: FnMut(S, &mut [S; N]) -> Result<Flow>,
{
    let mut stats = OdeStats::default();
    let mut t = t0;
    let mut y = y0;
    let mut h = opts.initial_step.min(opts.max_step);
    let mut k1 = f(&y);
    let mut next_stop = stops.iter().copied().filter(|s| *s > t0).peekable();
    let min_h = S::epsilon() * S::lit(16.0);
    let one = S::one();

    while t < t_end {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::MaxStepsExceeded {
                max_steps: opts.max_steps,
                t: t.as_f64(),
            });
        }
        let target = match next_stop.peek() {
            Some(s) if *s < t_end => *s,
            _ => t_end,
        };
        let mut step = h.min(target - t);
        let lands = step >= target - t;
        if lands {
            step = target - t;
        }

        let k2 = f(&axpy(&y, &[(A21, &k1)], step));
        let k3 = f(&axpy(&y, &[(A31, &k1), (A32, &k2)], step));
        let k4 = f(&axpy(&y, &[(A41, &k1), (A42, &k2), (A43, &k3)], step));
        let k5 = f(&axpy(
            &y,
            &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)],
            step,
        ));
        let k6 = f(&axpy(
            &y,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            step,
        ));
        let y_new = axpy(
            &y,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
            step,
        );
        let k7 = f(&y_new);

        let mut err = S::zero();
        for i in 0..N {
            let e = step
                * (S::lit(E1) * k1[i]
                    + S::lit(E3) * k3[i]
                    + S::lit(E4) * k4[i]
                    + S::lit(E5) * k5[i]
                    + S::lit(E6) * k6[i]
                    + S::lit(E7) * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
            let ratio = e / sc;
            err = err.max(ratio.abs());
        }
        if !err.is_finite() {
            err = S::lit(1e10);
        }

        if err <= one {
            stats.accepted += 1;
            t = if lands { target } else { t + step };
            y = y_new;
            if lands && next_stop.peek().is_some_and(|s| *s <= t) {
                next_stop.next();
            }
            let flow = observe(t, &mut y)?;
            k1 = if flow == Flow::Continue { f(&y) } else { k7 };
            if flow == Flow::Stop {
                break;
            }
            let fac = if err == S::zero() {
                S::lit(5.0)
            } else {
                (S::lit(0.9) * err.powf(S::lit(-0.2))).clamp_to(S::lit(0.2), S::lit(5.0))
            };
            if !lands || step >= h {
                h = (step * fac).min(opts.max_step);
            }
        } else {
            stats.rejected += 1;
            let fac = (S::lit(0.9) * err.powf(S::lit(-0.2))).max(S::lit(0.1));
            h = step * fac;
            if h < min_h * t.abs().max(one) {
                return Err(Error::StepSizeUnderflow { t: t.as_f64() });
            }
        }
    }
    Ok((t, y, stats))
}
