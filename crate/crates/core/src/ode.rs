//! Explicit Runge-Kutta integration of small autonomous-or-not systems,
//! sampled exactly at a prescribed set of output nodes and stopped at the
//! first triggered event.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type State = [f64; 4];

pub trait System {
    fn rhs(&self, s: f64, x: &State) -> State;
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at s = {s} (h = {h:e}, state = {state:?})")]
    StepUnderflow { s: f64, h: f64, state: State },
    #[error("non-finite state at s = {s}")]
    NonFinite { s: f64 },
    #[error("step budget of {0} exhausted")]
    TooManySteps(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Stepper {
    /// Adaptive Dormand-Prince 5(4). `atol` is applied relative to the
    /// sup-norm of the state, so decaying solutions keep relative accuracy.
    DormandPrince { atol: f64, rtol: f64 },
    /// Classical RK4 with a fixed number of equal steps per node interval.
    Rk4 { substeps: usize },
}

impl Default for Stepper {
    fn default() -> Self {
        Stepper::DormandPrince {
            atol: 1e-11,
            rtol: 1e-9,
        }
    }
}

/// A stopping condition on one component: fires when `x[index]` falls below
/// (or rises above) `level`, with equality counting if `inclusive`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event<K> {
    pub kind: K,
    pub index: usize,
    pub level: f64,
    pub below: bool,
    pub inclusive: bool,
}

impl<K> Event<K> {
    pub fn below(kind: K, index: usize, level: f64, inclusive: bool) -> Self {
        Self {
            kind,
            index,
            level,
            below: true,
            inclusive,
        }
    }

    pub fn above(kind: K, index: usize, level: f64, inclusive: bool) -> Self {
        Self {
            kind,
            index,
            level,
            below: false,
            inclusive,
        }
    }

    pub fn fired(&self, x: &State) -> bool {
        let v = if self.below {
            self.level - x[self.index]
        } else {
            x[self.index] - self.level
        };
        if self.inclusive {
            v >= 0.0
        } else {
            v > 0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hit<K> {
    pub kind: K,
    pub s: f64,
    pub state: State,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Integration<K> {
    /// States at the nodes that were reached, starting with the initial one.
    pub states: Vec<State>,
    pub event: Option<Hit<K>>,
    pub steps: usize,
}

const MAX_STEPS: usize = 5_000_000;

pub fn integrate<S: System, K: Copy>(
    sys: &S,
    stepper: Stepper,
    nodes: &[f64],
    x0: State,
    events: &[Event<K>],
) -> Result<Integration<K>, OdeError> {
    let mut out = Integration {
        states: vec![x0],
        event: None,
        steps: 0,
    };
    if let Some(ev) = events.iter().find(|e| e.fired(&x0)) {
        out.event = Some(Hit {
            kind: ev.kind,
            s: nodes[0],
            state: x0,
        });
        return Ok(out);
    }
    let mut x = x0;
    let mut h = match nodes {
        [a, b, ..] => 0.25 * (b - a),
        _ => return Ok(out),
    };
    let mut fx = sys.rhs(nodes[0], &x);
    for w in nodes.windows(2) {
        let (mut s, target) = (w[0], w[1]);
        while s < target {
            let remaining = target - s;
            let (s_new, x_new, f_new) = match stepper {
                Stepper::DormandPrince { atol, rtol } => {
                    let mut trial = h.min(remaining);
                    loop {
                        if trial < 1e-13 * s.abs().max(1.0) {
                            return Err(OdeError::StepUnderflow { s, h: trial, state: x });
                        }
                        let (xn, fxn, err) = dopri_step(sys, s, &x, &fx, trial, atol, rtol);
                        out.steps += 1;
                        if out.steps > MAX_STEPS {
                            return Err(OdeError::TooManySteps(MAX_STEPS));
                        }
                        let factor = if err == 0.0 {
                            5.0
                        } else {
                            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
                        };
                        if err <= 1.0 && xn.iter().all(|v| v.is_finite()) {
                            // Keep the unclipped step length for the next interval.
                            if trial < h && trial == remaining {
                                h = h.max(trial * factor.min(1.0));
                            } else {
                                h = trial * factor;
                            }
                            let s_new = if trial == remaining { target } else { s + trial };
                            break (s_new, xn, fxn);
                        }
                        trial *= if err.is_finite() { factor.min(0.9) } else { 0.1 };
                    }
                }
                Stepper::Rk4 { substeps } => {
                    let hh = remaining.min((w[1] - w[0]) / substeps.max(1) as f64);
                    let xn = rk4_step(sys, s, &x, &fx, hh);
                    out.steps += 1;
                    let s_new = if (target - (s + hh)).abs() <= 1e-12 * target.abs().max(1.0) {
                        target
                    } else {
                        s + hh
                    };
                    (s_new, xn, sys.rhs(s_new, &xn))
                }
            };
            if !x_new.iter().all(|v| v.is_finite()) {
                return Err(OdeError::NonFinite { s: s_new });
            }
            if events.iter().any(|e| e.fired(&x_new)) {
                out.event = Some(locate(events, s, &x, &fx, s_new, &x_new, &f_new));
                return Ok(out);
            }
            s = s_new;
            x = x_new;
            fx = f_new;
        }
        out.states.push(x);
    }
    Ok(out)
}

/// Earliest point in `[s0, s1]` where any event fires, using the cubic
/// Hermite interpolant of the step.
fn locate<K: Copy>(events: &[Event<K>], s0: f64, x0: &State, f0: &State, s1: f64, x1: &State, f1: &State) -> Hit<K> {
    let h = s1 - s0;
    let interp = |s: f64| -> State {
        let t = (s - s0) / h;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        std::array::from_fn(|i| h00 * x0[i] + h10 * h * f0[i] + h01 * x1[i] + h11 * h * f1[i])
    };
    let (mut lo, mut hi) = (s0, s1);
    let mut state = *x1;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let xm = interp(mid);
        if events.iter().any(|e| e.fired(&xm)) {
            hi = mid;
            state = xm;
        } else {
            lo = mid;
        }
    }
    let kind = events
        .iter()
        .find(|e| e.fired(&state))
        .map(|e| e.kind)
        .unwrap_or_else(|| {
            events
                .iter()
                .find(|e| e.fired(x1))
                .expect("event fired at step end")
                .kind
        });
    Hit { kind, s: hi, state }
}

fn axpy(x: &State, terms: &[(f64, &State)]) -> State {
    std::array::from_fn(|i| x[i] + terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

fn rk4_step<S: System>(sys: &S, s: f64, x: &State, k1: &State, h: f64) -> State {
    let k2 = sys.rhs(s + 0.5 * h, &axpy(x, &[(0.5 * h, k1)]));
    let k3 = sys.rhs(s + 0.5 * h, &axpy(x, &[(0.5 * h, &k2)]));
    let k4 = sys.rhs(s + h, &axpy(x, &[(h, &k3)]));
    axpy(x, &[(h / 6.0, k1), (h / 3.0, &k2), (h / 3.0, &k3), (h / 6.0, &k4)])
}

// Dormand-Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
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
// Difference between the 5th and 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn dopri_step<S: System>(sys: &S, s: f64, x: &State, k1: &State, h: f64, atol: f64, rtol: f64) -> (State, State, f64) {
    let k2 = sys.rhs(s + C2 * h, &axpy(x, &[(h * A21, k1)]));
    let k3 = sys.rhs(s + C3 * h, &axpy(x, &[(h * A31, k1), (h * A32, &k2)]));
    let k4 = sys.rhs(s + C4 * h, &axpy(x, &[(h * A41, k1), (h * A42, &k2), (h * A43, &k3)]));
    let k5 = sys.rhs(
        s + C5 * h,
        &axpy(x, &[(h * A51, k1), (h * A52, &k2), (h * A53, &k3), (h * A54, &k4)]),
    );
    let k6 = sys.rhs(
        s + h,
        &axpy(
            x,
            &[
                (h * A61, k1),
                (h * A62, &k2),
                (h * A63, &k3),
                (h * A64, &k4),
                (h * A65, &k5),
            ],
        ),
    );
    let xn = axpy(
        x,
        &[(h * B1, k1), (h * B3, &k3), (h * B4, &k4), (h * B5, &k5), (h * B6, &k6)],
    );
    let k7 = sys.rhs(s + h, &xn);
    let scale = x.iter().chain(xn.iter()).fold(0.0f64, |m, v| m.max(v.abs()));
    let mut acc = 0.0;
    for i in 0..4 {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let sc = atol * scale + rtol * x[i].abs().max(xn[i].abs());
        let r = if sc > 0.0 {
            e / sc
        } else if e == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        acc += r * r;
    }
    (xn, k7, (acc / 4.0).sqrt())
}
